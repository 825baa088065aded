#include <doctest.h>

#include "httpmbt/oracle.hpp"

using namespace httpmbt;

namespace {

const Fixture kFix = Fixture::small_pair();  // /a:"t1", /b:"t2"

OracleVerdict check(const std::vector<Exchange>& trace) {
  return oracle_check(trace, OracleState::from_fixture(kFix));
}

Exchange ex(HttpRequest req, HttpResponse resp) { return {std::move(req), std::move(resp)}; }

}  // namespace

TEST_CASE("a rejected PUT whose tag strong-matches the known tag is invalid") {
  // is[/a] = "t1"; the server must not answer 412 to If-Match "t1"
  auto v = check({ex(make_put("/a", "v", Precond{PrecondKind::if_match, ETag{false, "t1"}}),
                     make_response(412, std::nullopt, ""))});
  CHECK_FALSE(v.accept);
  CHECK(v.reject_index == 0);
}

TEST_CASE("a 304 on a tag known not to match is invalid") {
  // first a 412 records that /a's tag is not "zz"; then a 304 on "zz" lies
  auto v = check({
      ex(make_put("/a", "v", Precond{PrecondKind::if_match, ETag{false, "zz"}}),
         make_response(412, std::nullopt, "")),
      ex(make_get("/a", ETag{false, "zz"}), make_response(304, std::nullopt, "")),
  });
  CHECK_FALSE(v.accept);
  CHECK(v.reject_index == 1);
}

TEST_CASE("a 200 although the request tag weak-matches is invalid") {
  auto v = check({ex(make_get("/a", ETag{false, "t1"}),
                     make_response(200, ETag{false, "t1"}, "va"))});
  CHECK_FALSE(v.accept);
}

TEST_CASE("a coherent conditional session is accepted") {
  auto v = check({
      ex(make_get("/a"), make_response(200, ETag{false, "t1"}, "va")),
      ex(make_get("/a", ETag{false, "t1"}), make_response(304, std::nullopt, "")),
      ex(make_put("/a", "v2", Precond{PrecondKind::if_match, ETag{false, "t1"}}),
         make_response(204, ETag{false, "e9"}, "")),
      ex(make_get("/a", ETag{false, "e9"}), make_response(304, std::nullopt, "")),
      ex(make_get("/a"), make_response(200, ETag{false, "e9"}, "v2")),
  });
  CHECK(v.accept);
}

TEST_CASE("a 200 with a stale value after an accepted update is invalid") {
  auto v = check({
      ex(make_put("/a", "v2", Precond{PrecondKind::if_match, ETag{false, "t1"}}),
         make_response(204, ETag{false, "e9"}, "")),
      ex(make_get("/a"), make_response(200, ETag{false, "e9"}, "va")),
  });
  CHECK_FALSE(v.accept);
  CHECK(v.reject_index == 1);
}

TEST_CASE("a 200 that changes the tag without a modification is invalid") {
  auto v = check({
      ex(make_get("/a"), make_response(200, ETag{false, "other"}, "va")),
  });
  CHECK_FALSE(v.accept);
}

TEST_CASE("an accepted update clears recorded non-matches") {
  // "zz" is excluded for /a, but a successful PUT resets that knowledge
  auto v = check({
      ex(make_put("/a", "v", Precond{PrecondKind::if_match, ETag{false, "zz"}}),
         make_response(412, std::nullopt, "")),
      ex(make_put("/a", "v2", Precond{PrecondKind::if_match, ETag{false, "t1"}}),
         make_response(204, ETag{false, "zz"}, "")),
      ex(make_get("/a", ETag{false, "zz"}), make_response(304, std::nullopt, "")),
  });
  CHECK(v.accept);
}

TEST_CASE("unknown pairings are rejected") {
  auto v = check({ex(make_get("/a"), make_response(412, std::nullopt, ""))});
  CHECK_FALSE(v.accept);
  CHECK(v.reason == "unexpected request/response pairing");
}

TEST_CASE("pair_trace requires a strict request/response alternation") {
  HttpRequest req = make_get("/a");
  HttpResponse resp = make_response(200, ETag{false, "t1"}, "va");
  TraceRecord out;
  out.seq = 0;
  out.pcid = 1;
  out.outbound = true;
  out.raw = encode(req);
  TraceRecord in = out;
  in.seq = 1;
  in.outbound = false;
  in.raw = encode(resp);

  CHECK(pair_trace({out, in}).has_value());
  CHECK_FALSE(pair_trace({out}).has_value());
  CHECK_FALSE(pair_trace({in, out}).has_value());
  TraceRecord garbage = in;
  garbage.raw = "not http";
  CHECK_FALSE(pair_trace({out, garbage}).has_value());
}
