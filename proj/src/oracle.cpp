#include "httpmbt/oracle.hpp"

#include <algorithm>

namespace httpmbt {

OracleState OracleState::from_fixture(const Fixture& f) {
  OracleState st;
  for (const auto& e : f.entries) {
    st.data[e.path] = e.value;
    st.is[e.path] = e.tag;
  }
  return st;
}

namespace {

OracleVerdict rejected(std::size_t idx, std::string why) {
  return OracleVerdict{false, idx, std::move(why)};
}

bool member(const std::vector<ETag>& set, const ETag& t, bool strong) {
  return std::any_of(set.begin(), set.end(), [&](const ETag& e) {
    return strong ? strong_compare(e, t) : weak_compare(e, t);
  });
}

const ETag* known(const std::map<std::string, ETag>& m, const std::string& k) {
  auto it = m.find(k);
  return it == m.end() ? nullptr : &it->second;
}

}  // namespace

OracleVerdict oracle_check(const std::vector<Exchange>& trace, OracleState st) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const HttpRequest& req = trace[i].first;
    const HttpResponse& resp = trace[i].second;
    const std::string& k = req.target;

    std::optional<ETag> im, inm;
    if (const std::string* v = req.header("If-Match")) im = parse_etag(*v);
    if (const std::string* v = req.header("If-None-Match")) inm = parse_etag(*v);
    std::optional<ETag> resp_tag;
    if (const std::string* v = resp.header("ETag")) resp_tag = parse_etag(*v);

    if (req.method == "PUT" && !inm && resp.status / 100 == 2 && resp.body.empty()) {
      // PUT(k,t,v) :: SUCCESSFUL — if there is a precondition t, it must not
      // be a known non-match and must strong-match any known tag.
      if (im) {
        if (member(st.is_not[k], *im, true)) return rejected(i, "PUT succeeded on excluded tag");
        const ETag* cur = known(st.is, k);
        if (cur != nullptr && !strong_compare(*cur, *im))
          return rejected(i, "PUT succeeded without a strong match");
      }
      st.data[k] = req.body;
      // The figure forgets the new tag; when the response names it, record
      // it, otherwise the tag becomes unknown.
      if (resp_tag)
        st.is[k] = *resp_tag;
      else
        st.is.erase(k);
      st.is_not[k].clear();
      continue;
    }

    if (req.method == "PUT" && im && !inm && resp.status == 412) {
      // PUT(k,t,v) :: PRECONDITION_FAILED
      const ETag* cur = known(st.is, k);
      if (cur != nullptr && strong_compare(*cur, *im))
        return rejected(i, "PUT rejected although the tag strong-matches");
      st.is_not[k].push_back(*im);
      continue;
    }

    if (req.method == "GET" && inm && resp.status == 304) {
      // GET(k,t) :: NOT_MODIFIED
      if (member(st.is_not[k], *inm, false)) return rejected(i, "304 on an excluded tag");
      const ETag* cur = known(st.is, k);
      if (cur != nullptr && !weak_compare(*cur, *inm))
        return rejected(i, "304 without a weak match");
      st.is[k] = *inm;
      continue;
    }

    if (req.method == "GET" && resp.status == 200 && resp_tag) {
      // GET(k,t0) :: OK(t,v)
      const ETag* cur = known(st.is, k);
      if (inm && cur != nullptr && weak_compare(*cur, *inm))
        return rejected(i, "200 although the tag weak-matches");
      // ETags are pinned between modifications.
      if (cur != nullptr && !(*cur == *resp_tag))
        return rejected(i, "200 with a changed ETag");
      auto it = st.data.find(k);
      if (it != st.data.end() && it->second != resp.body)
        return rejected(i, "200 with an unexpected value");
      st.data[k] = resp.body;
      st.is[k] = *resp_tag;
      continue;
    }

    return rejected(i, "unexpected request/response pairing");
  }
  return OracleVerdict{};
}

std::optional<std::vector<Exchange>> pair_trace(const TraceLog& trace) {
  if (trace.size() % 2 != 0) return std::nullopt;
  std::vector<Exchange> out;
  for (std::size_t i = 0; i + 1 < trace.size(); i += 2) {
    if (!trace[i].outbound || trace[i + 1].outbound) return std::nullopt;
    DecodeResult a = decode(trace[i].raw);
    DecodeResult b = decode(trace[i + 1].raw);
    auto* da = std::get_if<Decoded>(&a);
    auto* db = std::get_if<Decoded>(&b);
    if (da == nullptr || db == nullptr) return std::nullopt;
    auto* req = std::get_if<HttpRequest>(&da->msg);
    auto* resp = std::get_if<HttpResponse>(&db->msg);
    if (req == nullptr || resp == nullptr) return std::nullopt;
    out.emplace_back(std::move(*req), std::move(*resp));
  }
  return out;
}

}  // namespace httpmbt
