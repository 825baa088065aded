#include "httpmbt/gen.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

namespace httpmbt {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t position) {
  // splitmix64 over the pair, so each position gets an independent stream
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (position + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string random_token(std::mt19937_64& rng, int len) {
  static constexpr char kAlpha[] = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::uniform_int_distribution<int> d(0, sizeof(kAlpha) - 2);
  std::string s;
  for (int i = 0; i < len; ++i) s += kAlpha[d(rng)];
  return s;
}

bool chance(std::mt19937_64& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

}  // namespace

GenState derive_gen_state(const TraceLog& trace, std::uint64_t seed, std::uint64_t position,
                          const GenConfig& cfg, const Fixture& fixture, int client_conns) {
  GenState gs;
  gs.seed = seed;
  gs.position = position;
  gs.cfg = cfg;
  for (int i = 1; i <= client_conns; ++i) gs.client_pcids.push_back(i);
  std::set<std::string> paths;
  for (const auto& e : fixture.entries) {
    gs.known_paths.push_back(e.path);
    paths.insert(e.path);
  }

  std::map<std::uint32_t, int> forwards_owed;
  for (const TraceRecord& r : trace) {
    DecodeResult d = decode(r.raw);
    const auto* ok = std::get_if<Decoded>(&d);
    if (ok == nullptr) continue;
    if (!r.outbound) {
      if (const auto* resp = std::get_if<HttpResponse>(&ok->msg)) {
        if (const std::string* v = resp->header("ETag")) {
          if (auto tag = parse_etag(*v)) {
            auto it = std::find(gs.observed_etags.begin(), gs.observed_etags.end(), *tag);
            if (it != gs.observed_etags.end()) gs.observed_etags.erase(it);
            gs.observed_etags.push_back(*tag);
          }
        }
      }
      if (r.pcid > static_cast<std::uint32_t>(client_conns)) forwards_owed[r.pcid]++;
    } else {
      if (const auto* req = std::get_if<HttpRequest>(&ok->msg)) {
        if (req->method == "PUT" && paths.insert(req->target).second)
          gs.known_paths.push_back(req->target);
        if (req->target.starts_with("/p")) gs.fresh_path_counter++;
      }
      if (r.pcid > static_cast<std::uint32_t>(client_conns)) forwards_owed[r.pcid]--;
    }
  }
  for (const auto& [pcid, owed] : forwards_owed) {
    if (owed > 0) gs.unanswered_forwards.push_back(pcid);
  }
  return gs;
}

HttpRequest gen_request(const GenState& gs) {
  std::mt19937_64 rng(mix(gs.seed, gs.position));

  std::string target;
  if (gs.known_paths.empty() || chance(rng, gs.cfg.p_fresh_path)) {
    target = "/p" + std::to_string(gs.fresh_path_counter + 1);
  } else {
    target = pick(rng, gs.known_paths);
  }

  std::optional<ETag> tag;
  if (chance(rng, gs.cfg.p_precond)) {
    if (!gs.observed_etags.empty() && chance(rng, gs.cfg.p_observed_tag)) {
      std::size_t window = std::min<std::size_t>(gs.observed_etags.size(),
                                                 std::max(1, gs.cfg.recent_tags));
      std::uniform_int_distribution<std::size_t> d(gs.observed_etags.size() - window,
                                                   gs.observed_etags.size() - 1);
      tag = gs.observed_etags[d(rng)];
    } else {
      tag = ETag{false, random_token(rng, 4)};
    }
    if (chance(rng, gs.cfg.p_weak_flip)) tag->weak = !tag->weak;
  }

  if (chance(rng, gs.cfg.p_put)) {
    std::optional<Precond> pre;
    if (tag) {
      PrecondKind kind = chance(rng, gs.cfg.p_inm_on_put) ? PrecondKind::if_none_match
                                                          : PrecondKind::if_match;
      pre = Precond{kind, *tag};
    }
    return make_put(std::move(target), random_token(rng, 5), pre);
  }
  return make_get(std::move(target), tag);
}

PhysPacket gen_packet(const GenState& gs) {
  std::mt19937_64 rng(mix(gs.seed, gs.position) ^ 0x5bd1e995ULL);

  if (!gs.unanswered_forwards.empty() && chance(rng, gs.cfg.p_origin_reply)) {
    // Act as the origin: answer the oldest forwarded message.
    std::uint32_t pcid = gs.unanswered_forwards.front();
    std::optional<ETag> tag;
    if (!gs.observed_etags.empty() && chance(rng, gs.cfg.p_observed_tag))
      tag = gs.observed_etags.back();
    else
      tag = ETag{false, random_token(rng, 4)};
    HttpResponse resp = make_response(200, tag, random_token(rng, 5));
    PhysPacket p;
    p.pcid = pcid;
    p.outbound = true;
    p.raw = encode(resp);
    p.msg = std::move(resp);
    return p;
  }

  HttpRequest req = gen_request(gs);
  PhysPacket p;
  p.pcid = pick(rng, gs.client_pcids);
  p.outbound = true;
  p.raw = encode(req);
  p.msg = std::move(req);
  return p;
}

}  // namespace httpmbt
