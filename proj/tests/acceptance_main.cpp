// Acceptance suite: runs every top-level requirement at its stated tolerance
// and prints one pass/fail line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "httpmbt/oracle.hpp"
#include "httpmbt/session.hpp"
#include "httpmbt/trace_io.hpp"
#include "support/brute.hpp"
#include "support/model_walk.hpp"

using namespace httpmbt;
using clock_type = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
              detail.empty() ? "" : " — ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

TraceRecord rec_of(std::uint64_t seq, std::uint32_t pcid, bool outbound, const HttpMessage& msg) {
  TraceRecord r;
  r.seq = seq;
  r.pcid = pcid;
  r.outbound = outbound;
  r.raw = encode(msg);
  r.summary = summarize(msg);
  return r;
}

// --------------------------------------------------------------------------
// 1. One hundred seeds against the correct reference server: zero false
//    rejections.

void criterion_1() {
  auto t0 = clock_type::now();
  int accepted = 0;
  std::string first_failure;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.connections = 3;
    cfg.budgets.max_steps = 200;
    Verdict v = run_session(cfg);
    if (v.kind == Verdict::Kind::accept) {
      ++accepted;
    } else if (first_failure.empty()) {
      first_failure = "seed " + std::to_string(seed) + " -> " +
                      verdict_name(v.kind) + " " + v.detail;
    }
  }
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << accepted << "/100 accepted in " << secs << " s";
  if (!first_failure.empty()) d << "; first failure: " << first_failure;
  report(1, "no false rejection of the valid reference server", accepted == 100 && secs < 300,
         d.str());
}

// --------------------------------------------------------------------------
// 2. Every catalog mutant is rejected within the one-minute bound for some
//    seed in 1..10; the two real-world bugs for at least 8 of 10 seeds.

void criterion_2() {
  bool pass = true;
  std::ostringstream detail;
  for (Mutant m : all_mutants()) {
    int rejections = 0;
    double worst_reject_secs = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      RunConfig cfg;
      cfg.seed = seed;
      cfg.connections = 3;
      cfg.mutant = mutant_name(m);
      if (is_proxy_mutant(m)) cfg.model = "proxy";
      cfg.budgets.max_steps = 2000;
      cfg.budgets.timeout_s = 60;
      auto t0 = clock_type::now();
      Verdict v = run_session(cfg);
      double secs = seconds_since(t0);
      if (v.kind == Verdict::Kind::reject && secs < 60.0) {
        ++rejections;
        worst_reject_secs = std::max(worst_reject_secs, secs);
      }
    }
    bool need_eight = m == Mutant::inm_strong || m == Mutant::put_skip_precond;
    bool ok = need_eight ? rejections >= 8 : rejections >= 1;
    if (!ok) pass = false;
    detail << mutant_name(m) << ":" << rejections << "/10 ";
  }
  report(2, "all catalog mutants rejected within one minute", pass, detail.str());
}

// --------------------------------------------------------------------------
// 3. The two golden reordering traces: accepted when a network delay can
//    explain the observation, rejected when none can.

void criterion_3() {
  TesterModel t = derive_tester(composed(proxy_model()), DeriveConfig{2, false});
  HttpRequest m1 = make_get("/x");
  HttpRequest m2 = make_get("/y");

  TraceLog reordered{
      rec_of(0, 1, true, m1),
      rec_of(1, 2, true, m2),
      rec_of(2, 3, false, m2),
      rec_of(3, 4, false, m1),
  };
  Verdict accept_case = replay_check(t, reordered, Budgets{});

  TraceLog impossible{
      rec_of(0, 1, true, m1),
      rec_of(1, 3, false, m2),
      rec_of(2, 2, true, m2),
  };
  Verdict reject_case = replay_check(t, impossible, Budgets{});

  bool pass = accept_case.kind == Verdict::Kind::accept &&
              reject_case.kind == Verdict::Kind::reject;
  report(3, "reordered forwards accepted, premature forwards rejected", pass,
         std::string("reordered=") + verdict_name(accept_case.kind) +
             " premature=" + verdict_name(reject_case.kind));
}

// --------------------------------------------------------------------------
// 4. The no-304 mutant admits a four-message counterexample:
//    GET, 200+ETag x, GET If-None-Match x, 200.

bool minimal_no304_shape(const TraceLog& trace) {
  if (trace.size() != 4) return false;
  auto msg = [&](int i) -> std::optional<HttpMessage> {
    DecodeResult d = decode(trace[i].raw);
    if (auto* ok = std::get_if<Decoded>(&d)) return std::move(ok->msg);
    return std::nullopt;
  };
  auto m0 = msg(0), m1 = msg(1), m2 = msg(2), m3 = msg(3);
  if (!m0 || !m1 || !m2 || !m3) return false;
  auto* g0 = std::get_if<HttpRequest>(&*m0);
  auto* r1 = std::get_if<HttpResponse>(&*m1);
  auto* g2 = std::get_if<HttpRequest>(&*m2);
  auto* r3 = std::get_if<HttpResponse>(&*m3);
  if (!g0 || !r1 || !g2 || !r3) return false;
  if (!trace[0].outbound || trace[1].outbound || !trace[2].outbound || trace[3].outbound)
    return false;
  if (g0->method != "GET" || g2->method != "GET" || g0->target != g2->target) return false;
  if (r1->status != 200 || r3->status != 200) return false;
  const std::string* etag_hdr = r1->header("ETag");
  const std::string* inm_hdr = g2->header("If-None-Match");
  if (etag_hdr == nullptr || inm_hdr == nullptr) return false;
  auto x = parse_etag(*etag_hdr);
  auto x2 = parse_etag(*inm_hdr);
  return x && x2 && weak_compare(*x, *x2);
}

void criterion_4() {
  int found_at_seed = -1;
  int rejecting_runs = 0;
  for (std::uint64_t seed = 1; seed <= 500 && found_at_seed < 0; ++seed) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.connections = 3;
    cfg.mutant = "no-304";
    cfg.budgets.max_steps = 50;
    Verdict v = run_session(cfg);
    if (v.kind != Verdict::Kind::reject) continue;
    ++rejecting_runs;
    if (minimal_no304_shape(v.trace)) found_at_seed = static_cast<int>(seed);
  }
  std::ostringstream d;
  d << rejecting_runs << " rejecting runs scanned";
  if (found_at_seed >= 0) d << "; 4-message counterexample at seed " << found_at_seed;
  report(4, "a rejecting no-304 trace with exactly four messages exists", found_at_seed >= 0,
         d.str());
}

// --------------------------------------------------------------------------
// 5. The hand-written checker and the derived tester agree on every
//    single-connection trace over a small exhaustive family.

struct ExhaustiveCounts {
  long traces = 0;
  std::string disagreement;
};

void enumerate_exchanges(const std::vector<HttpRequest>& requests,
                         const std::vector<HttpResponse>& responses, int depth,
                         std::vector<Exchange>& prefix, const ReplaySession& session,
                         const Fixture& fixture, ExhaustiveCounts& counts) {
  if (!counts.disagreement.empty()) return;
  for (const HttpRequest& req : requests) {
    for (const HttpResponse& resp : responses) {
      ReplaySession fork = session;
      bool tester_ok =
          fork.feed(rec_of(2 * prefix.size(), 1, true, HttpMessage(req))) ==
              ReplaySession::Status::alive &&
          fork.feed(rec_of(2 * prefix.size() + 1, 1, false, HttpMessage(resp))) ==
              ReplaySession::Status::alive &&
          fork.probe() == ReplaySession::Status::alive;

      prefix.push_back({req, resp});
      OracleVerdict ov = oracle_check(prefix, OracleState::from_fixture(fixture));
      ++counts.traces;

      if (tester_ok != ov.accept) {
        std::ostringstream d;
        d << "disagreement (tester " << (tester_ok ? "accepts" : "rejects") << ", checker "
          << (ov.accept ? "accepts" : "rejects") << ") on:";
        for (const Exchange& e : prefix)
          d << " [" << summarize(HttpMessage(e.first)) << " / "
            << summarize(HttpMessage(e.second)) << "]";
        counts.disagreement = d.str();
        prefix.pop_back();
        return;
      }
      if (tester_ok && depth > 1)
        enumerate_exchanges(requests, responses, depth - 1, prefix, fork, fixture, counts);
      prefix.pop_back();
      if (!counts.disagreement.empty()) return;
    }
  }
}

void criterion_5() {
  auto t0 = clock_type::now();
  Fixture fixture = Fixture::small_pair();

  std::vector<ETag> tags = {{false, "t1"}, {false, "t2"}, {false, "t9"}};
  std::vector<std::string> paths = {"/a", "/b"};
  std::vector<HttpRequest> requests;
  for (const std::string& p : paths) {
    requests.push_back(make_get(p));
    requests.push_back(make_put(p, "v9"));
    for (const ETag& t : tags) {
      requests.push_back(make_get(p, t));
      requests.push_back(make_put(p, "v9", Precond{PrecondKind::if_match, t}));
    }
  }
  std::vector<HttpResponse> responses;
  for (const ETag& t : tags) {
    for (const std::string& v : {std::string("va"), std::string("vb"), std::string("v9"),
                                 std::string()})
      responses.push_back(make_response(200, t, v));
    responses.push_back(make_response(201, t, ""));
    responses.push_back(make_response(204, t, ""));
  }
  responses.push_back(make_response(304, std::nullopt, ""));
  responses.push_back(make_response(404, std::nullopt, ""));
  responses.push_back(make_response(412, std::nullopt, ""));

  TesterModel t = derive_tester(http_server(literal_state(fixture)), DeriveConfig{1, false});
  ReplaySession root(t, Budgets{});
  std::vector<Exchange> prefix;
  ExhaustiveCounts counts;
  enumerate_exchanges(requests, responses, 3, prefix, root, fixture, counts);

  double secs = seconds_since(t0);
  std::ostringstream d;
  d << counts.traces << " traces checked in " << secs << " s";
  if (!counts.disagreement.empty()) d << "; " << counts.disagreement;
  bool pass = counts.disagreement.empty() && counts.traces < 100000 && secs < 120.0;
  report(5, "checker and derived tester agree on exhaustive linear traces", pass, d.str());
}

// --------------------------------------------------------------------------
// 6. Replay acceptance of the composed proxy model coincides with exhaustive
//    branch enumeration at depth 8.

void criterion_6() {
  auto t0 = clock_type::now();
  const int kDepth = 8;
  HttpRequest m1 = make_get("/x");
  HttpRequest m2 = make_get("/y");

  test::WalkConfig wcfg;
  wcfg.max_events = kDepth;
  wcfg.client_conns = 2;
  {
    PhysPacket p1;
    p1.pcid = 1;
    p1.outbound = true;
    p1.raw = encode(m1);
    p1.msg = m1;
    PhysPacket p2;
    p2.pcid = 2;
    p2.outbound = true;
    p2.raw = encode(m2);
    p2.msg = m2;
    wcfg.inputs = {p1, p2};
  }
  test::CompositionWalker walker(wcfg);
  std::set<test::TraceKey> model_set = walker.enumerate(proxy_model());

  TesterModel t = derive_tester(composed(proxy_model()), DeriveConfig{2, false});

  long checked = 0;
  long accepted = 0;
  std::string mismatch;

  // Candidate events: the two client sends plus either payload arriving on
  // any seen SUT connection or the next fresh one (accept order).
  std::function<void(const ReplaySession&, test::TraceKey&, std::uint32_t, int)> walk =
      [&](const ReplaySession& session, test::TraceKey& prefix, std::uint32_t seen_sut,
          int depth) {
        if (!mismatch.empty() || depth == 0) return;
        struct Candidate {
          TraceRecord rec;
          std::string rendered;
          std::uint32_t new_seen;
        };
        std::vector<Candidate> candidates;
        for (int i = 0; i < 2; ++i) {
          const HttpRequest& m = i == 0 ? m1 : m2;
          std::uint32_t pcid = i + 1;
          candidates.push_back(
              {rec_of(prefix.size(), pcid, true, HttpMessage(m)),
               test::render_event(true, pcid, to_sym(HttpMessage(m)), {}), seen_sut});
        }
        for (std::uint32_t pcid = 3; pcid <= 2 + seen_sut + 1; ++pcid) {
          for (int i = 0; i < 2; ++i) {
            const HttpRequest& m = i == 0 ? m1 : m2;
            candidates.push_back(
                {rec_of(prefix.size(), pcid, false, HttpMessage(m)),
                 test::render_event(false, pcid, to_sym(HttpMessage(m)), {}),
                 std::max(seen_sut, pcid - 2)});
          }
        }
        for (Candidate& c : candidates) {
          prefix.push_back(c.rendered);
          bool in_model = model_set.count(prefix) > 0;
          ReplaySession fork = session;
          bool tester_ok = fork.feed(c.rec) == ReplaySession::Status::alive &&
                           fork.probe() == ReplaySession::Status::alive;
          ++checked;
          if (tester_ok != in_model) {
            std::ostringstream d;
            d << "tester " << (tester_ok ? "accepts" : "rejects") << " but the model "
              << (in_model ? "produces" : "cannot produce") << ":";
            for (const std::string& e : prefix) d << " [" << e << "]";
            mismatch = d.str();
          } else if (tester_ok) {
            ++accepted;
            walk(fork, prefix, c.new_seen, depth - 1);
          }
          prefix.pop_back();
          if (!mismatch.empty()) return;
        }
      };

  ReplaySession root(t, Budgets{});
  test::TraceKey prefix;
  walk(root, prefix, 0, kDepth);

  double secs = seconds_since(t0);
  std::ostringstream d;
  d << "model traces=" << model_set.size() << ", candidates checked=" << checked
    << ", accepted=" << accepted << " in " << secs << " s";
  if (!mismatch.empty()) d << "; " << mismatch;
  bool pass = mismatch.empty() && accepted + 1 == static_cast<long>(model_set.size());
  report(6, "accepted traces equal exhaustive model enumeration at depth 8", pass, d.str());
}

// --------------------------------------------------------------------------
// 7. Constraint-store property suites at volume.

void criterion_7() {
  using test::Action;
  using test::apply_action;
  using test::kAssignOpaques;
  using test::random_scenario;
  using test::record_of;
  using test::Recorded;
  using test::Scenario;

  std::mt19937_64 rng(987654321);
  long cases = 0;
  std::string failure;

  for (int iter = 0; iter < 10000 && failure.empty(); ++iter) {
    Scenario sc = random_scenario(rng);
    ConstraintStore store;
    for (SymVar v : sc.vars) store = store.new_var(v.kind).second;

    std::vector<Recorded> recorded;
    for (const Action& a : sc.actions) {
      auto next = apply_action(store, a);
      auto attempted = recorded;
      attempted.push_back(record_of(a));
      bool sat = test::satisfiable(attempted, sc.vars, kAssignOpaques);
      ++cases;
      if (next.has_value() != sat) {
        failure = next.has_value() ? "accepted an unsatisfiable assertion"
                                   : "rejected a satisfiable assertion";
        break;
      }
      if (!next) break;
      // idempotence: re-asserting adds no knowledge
      auto again = apply_action(*next, a);
      if (!again || !(*again == *next)) {
        failure = "repeated assertion changed the store";
        break;
      }
      store = std::move(*next);
      recorded = std::move(attempted);
    }

    if (failure.empty() && sc.actions.size() >= 2) {
      // commutativity of satisfiability for the first two assertions
      ConstraintStore base;
      for (SymVar v : sc.vars) base = base.new_var(v.kind).second;
      std::optional<ConstraintStore> ab, ba;
      if (auto s1 = apply_action(base, sc.actions[0])) ab = apply_action(*s1, sc.actions[1]);
      if (auto s2 = apply_action(base, sc.actions[1])) ba = apply_action(*s2, sc.actions[0]);
      ++cases;
      if (ab.has_value() != ba.has_value()) failure = "assertion order changed satisfiability";
    }
  }

  bool strong_implies_weak = true;
  std::vector<ETag> alphabet;
  for (std::string o : {"t1", "t2", "t3", "t4"}) {
    alphabet.push_back({false, o});
    alphabet.push_back({true, o});
  }
  for (const ETag& a : alphabet)
    for (const ETag& b : alphabet)
      if (strong_compare(a, b) && !weak_compare(a, b)) strong_implies_weak = false;

  std::ostringstream d;
  d << cases << " generated cases";
  if (!failure.empty()) d << "; " << failure;
  if (!strong_implies_weak) d << "; strong-implies-weak violated";
  report(7, "constraint-store soundness, idempotence, commutativity, comparison law",
         failure.empty() && strong_implies_weak && cases >= 10000, d.str());
}

// --------------------------------------------------------------------------
// 8. Determinism: identical configuration and scripted endpoint give byte
//    identical logs and identical verdicts.

void criterion_8() {
  std::vector<ScriptStep> script;
  script.push_back({ScriptStep::Kind::expect, 0, ""});
  script.push_back(
      {ScriptStep::Kind::send, 1, encode(make_response(200, ETag{false, "zz"}, "zz"))});
  script.push_back({ScriptStep::Kind::expect, 0, ""});
  script.push_back({ScriptStep::Kind::expect, 0, ""});

  auto one_run = [&] {
    TesterModel t = derive_tester(composed(http_server(literal_state(Fixture::standard()))),
                                  DeriveConfig{3, false});
    ScriptedEndpoint io(script);
    GenHook gen = make_generator(21, GenConfig{}, Fixture::standard(), 3);
    return run(t, io, Budgets{}, gen, 3);
  };
  Verdict a = one_run();
  Verdict b = one_run();
  std::ostringstream sa, sb;
  write_trace(sa, a.trace);
  write_trace(sb, b.trace);
  bool pass = a.kind == b.kind && sa.str() == sb.str();
  report(8, "identical runs produce byte-identical trace logs", pass,
         std::string("verdict=") + verdict_name(a.kind) + ", " +
             std::to_string(a.trace.size()) + " events");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
