#include <doctest.h>

#include "httpmbt/derive.hpp"
#include "httpmbt/exec.hpp"
#include "httpmbt/http_model.hpp"
#include "httpmbt/net_model.hpp"

using namespace httpmbt;

namespace {

PhysPacket phys(std::uint32_t pcid, bool outbound, HttpMessage msg) {
  PhysPacket p;
  p.pcid = pcid;
  p.outbound = outbound;
  p.raw = encode(msg);
  p.msg = std::move(msg);
  return p;
}

Packet model_response(std::uint32_t conn, SymResponse resp) {
  return Packet{Mcid{conn, ConnOrigin::client_accepted}, false, SymPayload(std::move(resp))};
}

GenCtx ctx_with(PhysPacket p) { return GenCtx{std::make_shared<const PhysPacket>(std::move(p))}; }

GenCtx dummy_ctx() { return ctx_with(phys(1, true, make_get("/"))); }

// Expands a tester model to its front, resolving Determine by the given path.
TesterStep settle_tester(TesterModel t, const GenCtx& ctx, std::vector<bool> path = {}) {
  std::size_t d = 0;
  for (int guard = 0; guard < 10000; ++guard) {
    TesterStep s = t.step(ctx);
    if (auto* tau = std::get_if<TStepTau>(&s)) {
      t = tau->next;
      continue;
    }
    if (auto* det = std::get_if<TStepDetermine>(&s)) {
      bool left = d < path.size() ? path[d] : true;
      ++d;
      t = left ? det->first : det->second;
      continue;
    }
    return s;
  }
  return TesterStep(TStepFail{"settle bound"});
}

}  // namespace

TEST_CASE("connection map reconciliation follows the guard rules") {
  ConnMap m(3);

  SUBCASE("client connections are pinned one to one") {
    CHECK(m.bind(Mcid{2, ConnOrigin::client_accepted}, 2).has_value());
    CHECK_FALSE(m.bind(Mcid{2, ConnOrigin::client_accepted}, 3).has_value());
    CHECK(m.pcid_of(Mcid{1, ConnOrigin::client_accepted}) == 1u);
  }

  SUBCASE("a first forward binds, a conflicting later one fails") {
    auto m2 = m.bind(Mcid{1, ConnOrigin::server_created}, 7);
    REQUIRE(m2.has_value());
    CHECK(m2->pcid_of(Mcid{1, ConnOrigin::server_created}) == 7u);
    CHECK(m2->bind(Mcid{1, ConnOrigin::server_created}, 7).has_value());
    CHECK_FALSE(m2->bind(Mcid{1, ConnOrigin::server_created}, 9).has_value());
    // injectivity: a second mcid cannot claim the same pcid
    CHECK_FALSE(m2->bind(Mcid{2, ConnOrigin::server_created}, 7).has_value());
    CHECK(m2->bind(Mcid{2, ConnOrigin::server_created}, 8).has_value());
  }

  SUBCASE("server-created connections never map to client pcids") {
    CHECK_FALSE(m.bind(Mcid{1, ConnOrigin::server_created}, 2).has_value());
  }
}

TEST_CASE("dualization turns sends into expectations that guard the payload") {
  // model: send 304 on conn 1, then fail loudly if resumed
  Model m = send_then(model_response(1, SymResponse{304, std::nullopt, "", {}}),
                      fail("resumed"));
  TesterModel t = unifier(dualize(m), ConnMap(3), ConstraintStore(), DeriveConfig{3, false});

  SUBCASE("the expected packet passes the guard") {
    TesterStep s = settle_tester(t, dummy_ctx());
    auto* exp = std::get_if<TStepExpect>(&s);
    REQUIRE(exp != nullptr);
    TesterStep after =
        settle_tester(exp->k(phys(1, false, make_response(304, std::nullopt, ""))), dummy_ctx());
    auto* f = std::get_if<TStepFail>(&after);
    REQUIRE(f != nullptr);
    CHECK(f->reason == "resumed");  // the guard passed; the model itself failed
  }

  SUBCASE("a mismatched status is an unexpected payload") {
    TesterStep s = settle_tester(t, dummy_ctx());
    auto* exp = std::get_if<TStepExpect>(&s);
    REQUIRE(exp != nullptr);
    HttpResponse two_hundred = make_response(200, ETag{false, "x"}, "body");
    TesterStep after = settle_tester(exp->k(phys(1, false, two_hundred)), dummy_ctx());
    auto* f = std::get_if<TStepFail>(&after);
    REQUIRE(f != nullptr);
    CHECK(f->reason.find("Unexpected payload") == 0);
  }
}

TEST_CASE("dualization of a receive emits the generated packet") {
  // model: receive, then echo the payload back on the same connection
  Model m = recv_then([](const Packet& p) {
    return send_then(Packet{p.conn, false, p.payload}, fail("done"));
  });
  TesterModel t = unifier(dualize(m), ConnMap(3), ConstraintStore(), DeriveConfig{3, false});

  PhysPacket gen = phys(2, true, make_get("/echo"));
  TesterStep s = settle_tester(t, ctx_with(gen));
  auto* emit = std::get_if<TStepEmit>(&s);
  REQUIRE(emit != nullptr);
  CHECK(emit->pkt == gen);

  // after emitting, the dual expects the echo of the same payload
  TesterStep s2 = settle_tester(emit->next, dummy_ctx());
  auto* exp = std::get_if<TStepExpect>(&s2);
  REQUIRE(exp != nullptr);
  TesterStep ok = settle_tester(exp->k(phys(2, false, make_get("/echo"))), dummy_ctx());
  CHECK(std::get<TStepFail>(ok).reason == "done");
  TesterStep bad = settle_tester(exp->k(phys(2, false, make_get("/other"))), dummy_ctx());
  CHECK(std::get<TStepFail>(bad).reason.find("Unexpected payload") == 0);
}

TEST_CASE("branches become determine nodes whose unify prefixes prune") {
  // model: branch on a concrete condition; the false side is unreachable
  BoolExpr cond = BoolExpr::weak_match(TagExpr::literal(ETag{false, "x"}),
                                       TagExpr::literal(ETag{false, "x"}));
  Model m = branch(cond, fail("then"), fail("else"));
  TesterModel t = unifier(dualize(m), ConnMap(1), ConstraintStore(), DeriveConfig{1, false});

  TesterStep left = settle_tester(t, dummy_ctx(), {true});
  CHECK(std::get<TStepFail>(left).reason == "then");
  TesterStep right = settle_tester(t, dummy_ctx(), {false});
  // unify(cond, false) is unsatisfiable: the branch dies before any I/O
  CHECK(std::get<TStepFail>(right).reason.find("Unexpected payload") == 0);
}

TEST_CASE("fresh symbols pass through the unifier and get bound by guards") {
  // model: mint a tag, send it in a response, then fail if resumed
  Model m = fresh_then(SymKind::tag, [](SymVar v) {
    return send_then(
        model_response(1, SymResponse{204, TagExpr::var(v), "", {}}),
        fail("after"));
  });
  TesterModel t = unifier(dualize(m), ConnMap(1), ConstraintStore(), DeriveConfig{1, false});

  TesterStep s = settle_tester(t, dummy_ctx());
  auto* exp = std::get_if<TStepExpect>(&s);
  REQUIRE(exp != nullptr);
  CHECK(exp->store.size() == 1);  // the fresh variable exists, unconstrained

  TesterStep after =
      settle_tester(exp->k(phys(1, false, make_response(204, ETag{false, "e7"}, ""))),
                    dummy_ctx());
  CHECK(std::get<TStepFail>(after).reason == "after");
}

TEST_CASE("the guard ignores extra observed headers but not missing ones") {
  SymResponse want;
  want.status = 200;
  want.etag = TagExpr::literal(ETag{false, "e"});
  want.body = "hi";
  Packet model_pkt = model_response(1, want);

  HttpResponse got = make_response(200, ETag{false, "e"}, "hi");
  got.headers.push_back({"Date", "today"});
  got.headers.push_back({"Server", "ref"});
  auto r = guard_packet(model_pkt, phys(1, false, got), ConstraintStore(), ConnMap(1),
                        DeriveConfig{1, false});
  CHECK(std::holds_alternative<std::pair<ConstraintStore, ConnMap>>(r));

  HttpResponse no_etag = make_response(200, std::nullopt, "hi");
  auto r2 = guard_packet(model_pkt, phys(1, false, no_etag), ConstraintStore(), ConnMap(1),
                         DeriveConfig{1, false});
  REQUIRE(std::holds_alternative<std::string>(r2));
  CHECK(std::get<std::string>(r2).find("Unexpected payload") == 0);
}

TEST_CASE("status matching is lenient within 2xx unless strict") {
  SymResponse want;
  want.status = 204;
  Packet model_pkt = model_response(1, want);
  HttpResponse got = make_response(201, std::nullopt, "");

  auto lenient = guard_packet(model_pkt, phys(1, false, got), ConstraintStore(), ConnMap(1),
                              DeriveConfig{1, false});
  CHECK(std::holds_alternative<std::pair<ConstraintStore, ConnMap>>(lenient));
  auto strict = guard_packet(model_pkt, phys(1, false, got), ConstraintStore(), ConnMap(1),
                             DeriveConfig{1, true});
  CHECK(std::holds_alternative<std::string>(strict));

  // non-2xx statuses always compare exactly
  SymResponse want304;
  want304.status = 304;
  auto wrong = guard_packet(model_response(1, want304),
                            phys(1, false, make_response(412, std::nullopt, "")),
                            ConstraintStore(), ConnMap(1), DeriveConfig{1, false});
  CHECK(std::holds_alternative<std::string>(wrong));
}

TEST_CASE("guards on forwarded packets reconcile connections") {
  // a forwarded request on server-created mcid 1 observed on pcid 4
  Packet fwd{Mcid{1, ConnOrigin::server_created}, false, SymPayload(to_sym(make_get("/x")))};
  ConnMap m(3);
  auto r = guard_packet(fwd, phys(4, false, make_get("/x")), ConstraintStore(), m,
                        DeriveConfig{3, false});
  auto* ok = std::get_if<std::pair<ConstraintStore, ConnMap>>(&r);
  REQUIRE(ok != nullptr);
  CHECK(ok->second.pcid_of(Mcid{1, ConnOrigin::server_created}) == 4u);

  // the same mcid later observed on a different pcid is a connection error
  auto r2 = guard_packet(fwd, phys(5, false, make_get("/x")), ConstraintStore(), ok->second,
                         DeriveConfig{3, false});
  REQUIRE(std::holds_alternative<std::string>(r2));
  CHECK(std::get<std::string>(r2) == "Unexpected connection");
}

TEST_CASE("a deterministic model accepts its own mirror") {
  // the derived tester replayed against a transcript of the model itself
  Fixture f = Fixture::standard();
  DeriveConfig cfg{1, false};
  TesterModel t = derive_tester(composed(http_server(literal_state(f))), cfg);

  HttpRequest get_a = make_get("/a");
  HttpResponse resp_a = make_response(200, ETag{false, "tag-a"}, "alpha");
  HttpRequest get_c = make_get("/c", ETag{false, "tag-c"});
  HttpResponse resp_c = make_response(304, std::nullopt, "");

  TraceLog trace;
  auto add = [&](bool outbound, HttpMessage msg) {
    TraceRecord r;
    r.seq = trace.size();
    r.pcid = 1;
    r.outbound = outbound;
    r.raw = encode(msg);
    r.summary = summarize(msg);
    trace.push_back(std::move(r));
  };
  add(true, get_a);
  add(false, resp_a);
  add(true, get_c);
  add(false, resp_c);

  Verdict v = replay_check(t, trace, Budgets{});
  CHECK(v.kind == Verdict::Kind::accept);

  // mutate the transcript: wrong body must be rejected
  TraceLog bad = trace;
  HttpResponse wrong = make_response(200, ETag{false, "tag-a"}, "other");
  bad[1].raw = encode(wrong);
  Verdict v2 = replay_check(t, bad, Budgets{});
  CHECK(v2.kind == Verdict::Kind::reject);
}
