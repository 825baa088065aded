#include "httpmbt/message.hpp"

#include <stdexcept>

namespace httpmbt {

SymRequest to_sym(const HttpRequest& r) {
  SymRequest s;
  s.method = r.method;
  s.target = r.target;
  s.body = r.body;
  for (const HeaderField& h : r.headers) {
    if (header_name_is(h.name, "Content-Length")) continue;
    if (header_name_is(h.name, "If-Match") || header_name_is(h.name, "If-None-Match")) {
      auto tag = parse_etag(h.value);
      if (tag && !s.precond) {
        PrecondKind kind = header_name_is(h.name, "If-Match") ? PrecondKind::if_match
                                                              : PrecondKind::if_none_match;
        s.precond = Precond{kind, *tag};
        continue;
      }
    }
    s.extra_headers.push_back(h);
  }
  return s;
}

SymResponse to_sym(const HttpResponse& r) {
  SymResponse s;
  s.status = r.status;
  s.body = r.body;
  for (const HeaderField& h : r.headers) {
    if (header_name_is(h.name, "Content-Length")) continue;
    if (header_name_is(h.name, "ETag") && !s.etag) {
      if (auto tag = parse_etag(h.value)) {
        s.etag = TagExpr::literal(*tag);
        continue;
      }
    }
    s.extra_headers.push_back(h);
  }
  return s;
}

SymPayload to_sym(const HttpMessage& m) {
  return std::visit([](const auto& v) { return SymPayload(to_sym(v)); }, m);
}

HttpRequest to_wire(const SymRequest& r) {
  HttpRequest w;
  w.method = r.method;
  w.target = r.target;
  w.headers = r.extra_headers;
  if (r.precond)
    w.headers.push_back({precond_header_name(r.precond->kind), format_etag(r.precond->tag)});
  if (!r.body.empty()) w.headers.push_back({"Content-Length", std::to_string(r.body.size())});
  w.body = r.body;
  return w;
}

HttpResponse to_wire(const SymResponse& r) {
  HttpResponse w;
  w.status = r.status;
  w.reason = default_reason(r.status);
  w.headers = r.extra_headers;
  if (r.etag) {
    if (r.etag->is_var()) throw std::invalid_argument("to_wire: symbolic ETag");
    w.headers.push_back({"ETag", format_etag(r.etag->literal_value())});
  }
  if (!r.body.empty() || r.status == 200)
    w.headers.push_back({"Content-Length", std::to_string(r.body.size())});
  w.body = r.body;
  return w;
}

std::string summarize(const HttpMessage& m) {
  if (const auto* req = std::get_if<HttpRequest>(&m)) {
    std::string s = req->method + " " + req->target;
    if (const std::string* v = req->header("If-Match")) s += " If-Match:" + *v;
    if (const std::string* v = req->header("If-None-Match")) s += " If-None-Match:" + *v;
    if (!req->body.empty()) s += " len=" + std::to_string(req->body.size());
    return s;
  }
  const auto& resp = std::get<HttpResponse>(m);
  std::string s = std::to_string(resp.status);
  if (const std::string* v = resp.header("ETag")) s += " ETag:" + *v;
  if (!resp.body.empty()) s += " len=" + std::to_string(resp.body.size());
  return s;
}

}  // namespace httpmbt
