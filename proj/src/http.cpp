#include "httpmbt/http.hpp"

#include <cctype>
#include <charconv>

namespace httpmbt {

bool header_name_is(std::string_view name, std::string_view expected) {
  if (name.size() != expected.size()) return false;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(name[i])) !=
        std::tolower(static_cast<unsigned char>(expected[i])))
      return false;
  }
  return true;
}

static const std::string* find_header(const std::vector<HeaderField>& hs, std::string_view name) {
  for (const HeaderField& h : hs) {
    if (header_name_is(h.name, name)) return &h.value;
  }
  return nullptr;
}

const std::string* HttpRequest::header(std::string_view name) const {
  return find_header(headers, name);
}

const std::string* HttpResponse::header(std::string_view name) const {
  return find_header(headers, name);
}

static void encode_fields(std::string& out, const std::vector<HeaderField>& hs,
                          const std::string& body) {
  for (const HeaderField& h : hs) {
    out += h.name;
    out += ": ";
    out += h.value;
    out += "\r\n";
  }
  out += "\r\n";
  out += body;
}

std::string encode(const HttpRequest& r) {
  std::string out = r.method;
  out += ' ';
  out += r.target;
  out += " HTTP/1.1\r\n";
  encode_fields(out, r.headers, r.body);
  return out;
}

std::string encode(const HttpResponse& r) {
  std::string out = "HTTP/1.1 ";
  out += std::to_string(r.status);
  out += ' ';
  out += r.reason;
  out += "\r\n";
  encode_fields(out, r.headers, r.body);
  return out;
}

std::string encode(const HttpMessage& m) {
  return std::visit([](const auto& v) { return encode(v); }, m);
}

namespace {

// Splits the next CRLF-terminated line off `rest`. Bare LF is a framing
// error; an unterminated line means the buffer is still incomplete.
enum class LineStatus { ok, need_more, bare_lf };

LineStatus next_line(std::string_view& rest, std::string_view& line) {
  std::size_t nl = rest.find('\n');
  if (nl == std::string_view::npos) return LineStatus::need_more;
  if (nl == 0 || rest[nl - 1] != '\r') return LineStatus::bare_lf;
  line = rest.substr(0, nl - 1);
  rest.remove_prefix(nl + 1);
  return LineStatus::ok;
}

std::string_view trim_ows(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_status_code(std::string_view s, int& out) {
  if (s.size() != 3) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

DecodeResult decode(std::string_view buf) {
  std::string_view rest = buf;
  std::string_view start_line;
  switch (next_line(rest, start_line)) {
    case LineStatus::need_more: return NeedMore{};
    case LineStatus::bare_lf: return Malformed{"bare LF in start line"};
    case LineStatus::ok: break;
  }

  HttpMessage msg;
  if (start_line.starts_with("HTTP/1.1 ")) {
    HttpResponse resp;
    std::string_view tail = start_line.substr(9);
    std::size_t sp = tail.find(' ');
    std::string_view code = sp == std::string_view::npos ? tail : tail.substr(0, sp);
    if (!parse_status_code(code, resp.status)) return Malformed{"bad status code"};
    resp.reason = sp == std::string_view::npos ? "" : std::string(tail.substr(sp + 1));
    msg = std::move(resp);
  } else {
    std::size_t sp1 = start_line.find(' ');
    std::size_t sp2 = sp1 == std::string_view::npos ? sp1 : start_line.find(' ', sp1 + 1);
    if (sp2 == std::string_view::npos) return Malformed{"bad request line"};
    HttpRequest req;
    req.method = std::string(start_line.substr(0, sp1));
    req.target = std::string(start_line.substr(sp1 + 1, sp2 - sp1 - 1));
    std::string_view version = start_line.substr(sp2 + 1);
    if (version != "HTTP/1.1") return Malformed{"bad HTTP version"};
    if (req.method != "GET" && req.method != "PUT") return Malformed{"unsupported method"};
    if (req.target.empty() || req.target[0] != '/') return Malformed{"bad request target"};
    msg = std::move(req);
  }

  std::vector<HeaderField> headers;
  std::size_t content_length = 0;
  for (;;) {
    std::string_view line;
    switch (next_line(rest, line)) {
      case LineStatus::need_more: return NeedMore{};
      case LineStatus::bare_lf: return Malformed{"bare LF in header block"};
      case LineStatus::ok: break;
    }
    if (line.empty()) break;  // end of headers
    std::size_t colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0) return Malformed{"bad header field"};
    HeaderField h;
    h.name = std::string(line.substr(0, colon));
    h.value = std::string(trim_ows(line.substr(colon + 1)));
    if (header_name_is(h.name, "Content-Length")) {
      auto [p, ec] =
          std::from_chars(h.value.data(), h.value.data() + h.value.size(), content_length);
      if (ec != std::errc() || p != h.value.data() + h.value.size())
        return Malformed{"bad Content-Length"};
    }
    headers.push_back(std::move(h));
  }
  if (rest.size() < content_length) return NeedMore{};

  std::string body(rest.substr(0, content_length));
  std::size_t consumed = buf.size() - rest.size() + content_length;
  std::visit(
      [&](auto& m) {
        m.headers = std::move(headers);
        m.body = std::move(body);
      },
      msg);
  return Decoded{std::move(msg), consumed};
}

const char* precond_header_name(PrecondKind k) {
  return k == PrecondKind::if_match ? "If-Match" : "If-None-Match";
}

const char* default_reason(int status) {
  switch (status) {
    case 200: return "OK";
    case 201: return "Created";
    case 204: return "No Content";
    case 304: return "Not Modified";
    case 404: return "Not Found";
    case 412: return "Precondition Failed";
    default: return "Unknown";
  }
}

HttpRequest make_get(std::string target, std::optional<ETag> if_none_match) {
  HttpRequest r;
  r.method = "GET";
  r.target = std::move(target);
  r.headers.push_back({"Host", "sut"});
  if (if_none_match) r.headers.push_back({"If-None-Match", format_etag(*if_none_match)});
  return r;
}

HttpRequest make_put(std::string target, std::string body, std::optional<Precond> precond) {
  HttpRequest r;
  r.method = "PUT";
  r.target = std::move(target);
  r.headers.push_back({"Host", "sut"});
  if (precond)
    r.headers.push_back({precond_header_name(precond->kind), format_etag(precond->tag)});
  if (!body.empty())
    r.headers.push_back({"Content-Length", std::to_string(body.size())});
  r.body = std::move(body);
  return r;
}

HttpResponse make_response(int status, std::optional<ETag> etag, std::string body) {
  HttpResponse r;
  r.status = status;
  r.reason = default_reason(status);
  if (etag) r.headers.push_back({"ETag", format_etag(*etag)});
  if (!body.empty() || status == 200)
    r.headers.push_back({"Content-Length", std::to_string(body.size())});
  r.body = std::move(body);
  return r;
}

}  // namespace httpmbt
