#include "httpmbt/harness.hpp"

#include <algorithm>

#include "httpmbt/trace_io.hpp"

#include <nlohmann/json.hpp>

namespace httpmbt {

namespace {

struct MutantEntry {
  Mutant m;
  const char* name;
};

constexpr MutantEntry kMutants[] = {
    {Mutant::inm_strong, "inm-strong"},
    {Mutant::put_skip_precond, "put-skip-precond"},
    {Mutant::wrong_target_write, "wrong-target-write"},
    {Mutant::no_304, "no-304"},
    {Mutant::missing_404, "missing-404"},
    {Mutant::stale_etag, "stale-etag"},
    {Mutant::swap_304_412, "swap-304-412"},
    {Mutant::body_off_by_one, "body-off-by-one"},
    {Mutant::proxy_body_corrupt, "proxy-body-corrupt"},
    {Mutant::constant_etag, "constant-etag"},
};

}  // namespace

const char* mutant_name(Mutant m) {
  for (const auto& e : kMutants) {
    if (e.m == m) return e.name;
  }
  return "?";
}

std::optional<Mutant> mutant_from_name(std::string_view name) {
  for (const auto& e : kMutants) {
    if (name == e.name) return e.m;
  }
  return std::nullopt;
}

const std::vector<Mutant>& all_mutants() {
  static const std::vector<Mutant> v = [] {
    std::vector<Mutant> out;
    for (const auto& e : kMutants) out.push_back(e.m);
    return out;
  }();
  return v;
}

bool is_proxy_mutant(Mutant m) { return m == Mutant::proxy_body_corrupt; }

// ---------------------------------------------------------------------------

ServerCore::ServerCore(const Fixture& fixture, std::optional<Mutant> mutant,
                       std::uint64_t etag_seed)
    : mutant_(mutant), rng_(etag_seed) {
  for (const auto& e : fixture.entries) {
    data_[e.path] = e.value;
    tags_[e.path] = e.tag;
  }
}

const std::string* ServerCore::value_of(const std::string& path) const {
  auto it = data_.find(path);
  return it == data_.end() ? nullptr : &it->second;
}

const ETag* ServerCore::tag_of(const std::string& path) const {
  auto it = tags_.find(path);
  return it == tags_.end() ? nullptr : &it->second;
}

ETag ServerCore::mint() {
  static constexpr char kAlpha[] = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::string s = "e" + std::to_string(++mint_counter_) + "-";
  std::uniform_int_distribution<int> d(0, sizeof(kAlpha) - 2);
  for (int i = 0; i < 4; ++i) s += kAlpha[d(rng_)];
  return ETag{false, std::move(s)};
}

HttpResponse ServerCore::finish(HttpResponse resp) {
  if (mutant_ == Mutant::constant_etag) {
    for (HeaderField& h : resp.headers) {
      if (header_name_is(h.name, "ETag")) h.value = "\"etag-const\"";
    }
  }
  if (mutant_ == Mutant::body_off_by_one && resp.status == 200 && !resp.body.empty()) {
    resp.body.pop_back();
    for (HeaderField& h : resp.headers) {
      if (header_name_is(h.name, "Content-Length")) h.value = std::to_string(resp.body.size());
    }
  }
  return resp;
}

HttpResponse ServerCore::do_get(const HttpRequest& req) {
  auto it = data_.find(req.target);
  if (it == data_.end()) {
    if (mutant_ == Mutant::missing_404) return make_response(200, std::nullopt, "oops");
    return make_response(404, std::nullopt, "");
  }
  const ETag& stored = tags_.at(req.target);
  if (const std::string* v = req.header("If-None-Match")) {
    if (auto tag = parse_etag(*v)) {
      bool matched = mutant_ == Mutant::inm_strong ? strong_compare(*tag, stored)
                                                   : weak_compare(*tag, stored);
      if (matched) {
        if (mutant_ == Mutant::no_304) return make_response(200, stored, it->second);
        if (mutant_ == Mutant::swap_304_412) return make_response(412, std::nullopt, "");
        return make_response(304, std::nullopt, "");
      }
    }
  }
  return make_response(200, stored, it->second);
}

HttpResponse ServerCore::do_put(const HttpRequest& req) {
  bool exists = data_.count(req.target) > 0;
  const std::string* im = req.header("If-Match");
  const std::string* inm = req.header("If-None-Match");

  if (mutant_ != Mutant::put_skip_precond && (im != nullptr || inm != nullptr)) {
    if (!exists) {
      if (mutant_ == Mutant::swap_304_412) return make_response(304, std::nullopt, "");
      return make_response(412, std::nullopt, "");
    }
    const ETag& stored = tags_.at(req.target);
    bool pass = true;
    if (im != nullptr) {
      auto tag = parse_etag(*im);
      pass = tag && strong_compare(*tag, stored);
    } else {
      auto tag = parse_etag(*inm);
      bool matched = tag && (mutant_ == Mutant::inm_strong ? strong_compare(*tag, stored)
                                                           : weak_compare(*tag, stored));
      pass = !matched;
    }
    if (!pass) {
      if (mutant_ == Mutant::swap_304_412) return make_response(304, std::nullopt, "");
      return make_response(412, std::nullopt, "");
    }
  }

  ETag fresh = mint();
  ETag reported = fresh;
  if (mutant_ == Mutant::stale_etag && exists) reported = tags_.at(req.target);

  std::string write_target = req.target;
  if (mutant_ == Mutant::wrong_target_write) write_target += ".shadow";
  data_[write_target] = req.body;
  tags_[req.target] = fresh;

  return make_response(exists ? 204 : 201, reported, "");
}

HttpResponse ServerCore::handle(const HttpRequest& req) {
  if (req.method == "GET") return finish(do_get(req));
  if (req.method == "PUT") return finish(do_put(req));
  return finish(make_response(404, std::nullopt, ""));
}

// ---------------------------------------------------------------------------

ReferenceServerEndpoint::ReferenceServerEndpoint(const Fixture& fixture,
                                                 std::optional<Mutant> mutant,
                                                 std::uint64_t etag_seed)
    : core_(fixture, mutant, etag_seed) {}

std::uint32_t ReferenceServerEndpoint::open_connection() { return ++next_pcid_; }

void ReferenceServerEndpoint::send(std::uint32_t pcid, std::string_view bytes) {
  if (pcid == 0 || pcid > next_pcid_) throw endpoint_error("send on unknown connection");
  rx_.feed(pcid, bytes);
  while (auto m = rx_.pop()) {
    HttpResponse resp;
    if (m->malformed) {
      resp = make_response(404, std::nullopt, "");
    } else if (auto* req = std::get_if<HttpRequest>(&m->msg)) {
      resp = core_.handle(*req);
    } else {
      resp = make_response(404, std::nullopt, "");
    }
    out_.push_back({m->pcid, encode(resp)});
  }
}

std::optional<RecvChunk> ReferenceServerEndpoint::maybe_recv(int) {
  if (out_.empty()) return std::nullopt;
  RecvChunk c = std::move(out_.front());
  out_.pop_front();
  return c;
}

// ---------------------------------------------------------------------------

ReferenceProxyEndpoint::ReferenceProxyEndpoint(bool corrupt_forwards)
    : corrupt_(corrupt_forwards) {}

std::uint32_t ReferenceProxyEndpoint::open_connection() { return ++client_count_; }

std::string corrupt_forwarded_message(std::string raw) {
  std::size_t header_end = raw.find("\r\n\r\n");
  if (header_end != std::string::npos && header_end + 4 < raw.size()) {
    raw.back() ^= 0x01;
  } else if (raw.size() > 5) {
    raw[5] ^= 0x01;
  }
  return raw;
}

void ReferenceProxyEndpoint::send(std::uint32_t pcid, std::string_view bytes) {
  bool from_client = pcid >= 1 && pcid <= client_count_;
  if (!from_client && fwd_origin_.count(pcid) == 0)
    throw endpoint_error("send on unknown connection");
  rx_.feed(pcid, bytes);
  while (auto m = rx_.pop()) {
    if (m->malformed) continue;  // pass-through proxy only relays complete messages
    if (m->pcid >= 1 && m->pcid <= client_count_) {
      std::uint32_t fwd = ++next_sut_pcid_;
      fwd_origin_[fwd] = m->pcid;
      out_.push_back(
          {fwd, corrupt_ ? corrupt_forwarded_message(std::move(m->raw)) : std::move(m->raw)});
    } else {
      out_.push_back({fwd_origin_.at(m->pcid), std::move(m->raw)});
    }
  }
}

std::optional<RecvChunk> ReferenceProxyEndpoint::maybe_recv(int) {
  if (out_.empty()) return std::nullopt;
  RecvChunk c = std::move(out_.front());
  out_.pop_front();
  return c;
}

// ---------------------------------------------------------------------------

ScriptedEndpoint::ScriptedEndpoint(std::vector<ScriptStep> script) : script_(std::move(script)) {
  advance();
}

void ScriptedEndpoint::advance() {
  while (pos_ < script_.size() && script_[pos_].kind == ScriptStep::Kind::send) {
    out_.push_back({script_[pos_].pcid, script_[pos_].raw});
    ++pos_;
  }
}

std::uint32_t ScriptedEndpoint::open_connection() { return ++next_pcid_; }

void ScriptedEndpoint::send(std::uint32_t pcid, std::string_view bytes) {
  if (closed_) throw endpoint_error("scripted endpoint closed");
  rx_.feed(pcid, bytes);
  while (auto m = rx_.pop()) {
    if (pos_ >= script_.size()) {
      closed_ = true;
      throw endpoint_error("script exhausted");
    }
    const ScriptStep& step = script_[pos_];
    bool pcid_ok = step.pcid == 0 || step.pcid == m->pcid;
    bool bytes_ok = step.raw.empty() || step.raw == m->raw;
    if (!pcid_ok || !bytes_ok) {
      closed_ = true;
      throw endpoint_error("tester deviated from script");
    }
    ++pos_;
    advance();
  }
}

std::optional<RecvChunk> ScriptedEndpoint::maybe_recv(int) {
  if (out_.empty()) return std::nullopt;
  RecvChunk c = std::move(out_.front());
  out_.pop_front();
  return c;
}

std::vector<ScriptStep> ScriptedEndpoint::parse(std::istream& in) {
  std::vector<ScriptStep> steps;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    ScriptStep s;
    std::string op = j.at("op").get<std::string>();
    s.kind = op == "send" ? ScriptStep::Kind::send : ScriptStep::Kind::expect;
    s.pcid = j.value("pcid", 0u);
    if (j.contains("raw")) s.raw = base64_decode(j.at("raw").get<std::string>());
    if (s.kind == ScriptStep::Kind::send && s.raw.empty())
      throw std::runtime_error("script send step without raw bytes");
    steps.push_back(std::move(s));
  }
  return steps;
}

}  // namespace httpmbt
