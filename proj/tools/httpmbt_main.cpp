#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "httpmbt/oracle.hpp"
#include "httpmbt/session.hpp"
#include "httpmbt/trace_io.hpp"

namespace {

constexpr int kExitAccept = 0;
constexpr int kExitReject = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 64;

int exit_code(const httpmbt::Verdict& v) {
  switch (v.kind) {
    case httpmbt::Verdict::Kind::accept: return kExitAccept;
    case httpmbt::Verdict::Kind::reject: return kExitReject;
    case httpmbt::Verdict::Kind::inconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

void print_verdict(const httpmbt::Verdict& v) {
  switch (v.kind) {
    case httpmbt::Verdict::Kind::accept:
      // A budget statement, not a proof of conformance.
      std::cout << "ACCEPT: no violation found within " << v.steps
                << " observed events (budget exhausted, not a proof)\n";
      break;
    case httpmbt::Verdict::Kind::reject: {
      std::cout << "REJECT: every explanation of the observed trace failed\n";
      std::cout << "--- transcript (" << v.trace.size() << " events) ---\n";
      for (const auto& r : v.trace) {
        std::cout << "  #" << r.seq << " " << (r.outbound ? "-> " : "<- ") << "pcid " << r.pcid
                  << "  " << r.summary << "\n";
      }
      std::cout << "--- last branch failures ---\n";
      for (const auto& reason : v.reasons) std::cout << "  " << reason << "\n";
      break;
    }
    case httpmbt::Verdict::Kind::inconclusive:
      std::cout << "INCONCLUSIVE: " << v.detail << "\n";
      break;
  }
}

void add_run_options(CLI::App& app, httpmbt::RunConfig& cfg, std::string& endpoint_spec) {
  app.add_option("--model", cfg.model, "Model to test against: http or proxy");
  app.add_option("--endpoint", endpoint_spec,
                 "Endpoint: reference, tcp, or scripted (scripted accepts "
                 "an inline path: scripted=FILE)");
  app.add_option("--host", cfg.host, "SUT host for the tcp endpoint");
  app.add_option("--port", cfg.port, "SUT port for the tcp endpoint");
  app.add_option("--origin-port", [&cfg](const std::vector<std::string>& vals) {
    cfg.origin_port = static_cast<std::uint16_t>(std::stoul(vals.at(0)));
    return true;
  }, "Listen here for SUT-initiated connections (proxy forwarding)");
  app.add_option("--mutant", [&cfg](const std::vector<std::string>& vals) {
    cfg.mutant = vals.at(0);
    return true;
  }, "Inject a catalog bug into the reference SUT");
  app.add_option("--script", cfg.script_path, "Script file for the scripted endpoint");
  app.add_option("--seed", cfg.seed, "Generator seed");
  app.add_option("--max-steps", cfg.budgets.max_steps, "External events before accepting");
  app.add_option("--retries", cfg.budgets.retries, "Receive retries before postponing");
  app.add_option("--poll-ms", cfg.budgets.poll_ms, "Receive poll interval");
  app.add_option("--max-branches", cfg.budgets.max_branches, "Live branch limit");
  app.add_option("--timeout-s", cfg.budgets.timeout_s, "Wall-clock budget");
  app.add_option("--connections", cfg.connections, "Client connections to open");
  app.add_option("--trace-out", cfg.trace_out, "Write the interaction log here");
  app.add_flag("--strict-status", cfg.strict_status,
               "Require exact status codes instead of 2xx-class matching");
  app.add_option("--fixture", cfg.fixture, "Initial state knowledge: literal or symbolic");
  app.add_option("--gen-p-put", cfg.gen.p_put, "P(PUT)");
  app.add_option("--gen-p-fresh-path", cfg.gen.p_fresh_path, "P(unseen path)");
  app.add_option("--gen-p-precond", cfg.gen.p_precond, "P(precondition header)");
  app.add_option("--gen-p-observed-tag", cfg.gen.p_observed_tag, "P(reuse observed ETag)");
  app.add_option("--gen-p-weak-flip", cfg.gen.p_weak_flip, "P(flip weakness flag)");
}

void apply_endpoint_spec(httpmbt::RunConfig& cfg, const std::string& spec) {
  if (spec.empty()) return;
  auto eq = spec.find('=');
  if (eq == std::string::npos) {
    cfg.endpoint = spec;
    return;
  }
  cfg.endpoint = spec.substr(0, eq);
  if (cfg.endpoint == "scripted") cfg.script_path = spec.substr(eq + 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"httpmbt: model-derived conformance tester for an HTTP/1.1 subset"};
  app.require_subcommand(0, 1);

  httpmbt::RunConfig cfg;
  std::string endpoint_spec;
  add_run_options(app, cfg, endpoint_spec);

  CLI::App* replay = app.add_subcommand("replay", "Re-judge a recorded trace against the model");
  std::string replay_trace;
  replay->add_option("trace", replay_trace, "Trace file (JSONL)")->required();

  CLI::App* oracle = app.add_subcommand(
      "oracle", "Judge a single-connection trace with the hand-written checker");
  std::string oracle_trace;
  oracle->add_option("trace", oracle_trace, "Trace file (JSONL)")->required();

  CLI::App* serve = app.add_subcommand("serve", "Run the reference SUT on a TCP port");
  std::uint16_t serve_port = 0;
  serve->add_option("--port", serve_port, "Listen port (0 picks one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    apply_endpoint_spec(cfg, endpoint_spec);

    if (replay->parsed()) {
      httpmbt::Verdict v = httpmbt::replay_session(cfg, httpmbt::load_trace_file(replay_trace));
      print_verdict(v);
      return exit_code(v);
    }
    if (oracle->parsed()) {
      httpmbt::TraceLog trace = httpmbt::load_trace_file(oracle_trace);
      auto exchanges = httpmbt::pair_trace(trace);
      if (!exchanges) {
        std::cout << "REJECT: trace is not an alternating request/response session\n";
        return kExitReject;
      }
      httpmbt::OracleVerdict ov = httpmbt::oracle_check(
          *exchanges, httpmbt::OracleState::from_fixture(httpmbt::fixture_of(cfg)));
      if (ov.accept) {
        std::cout << "ACCEPT: trace consistent with the conditional-request rules\n";
        return kExitAccept;
      }
      std::cout << "REJECT at exchange " << ov.reject_index << ": " << ov.reason << "\n";
      return kExitReject;
    }
    if (serve->parsed()) {
      std::optional<httpmbt::Mutant> m;
      if (cfg.mutant) m = httpmbt::mutant_from_name(*cfg.mutant);
      auto sut = httpmbt::SocketSut::serve_http(httpmbt::fixture_of(cfg), m, cfg.seed, serve_port);
      std::cout << "reference server listening on 127.0.0.1:" << sut->port() << "\n";
      std::cout << "press enter to stop\n";
      std::cin.get();
      return 0;
    }

    httpmbt::Verdict v = httpmbt::run_session(cfg);
    print_verdict(v);
    if (!cfg.trace_out.empty()) std::cout << "trace written to " << cfg.trace_out << "\n";
    return exit_code(v);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInconclusive;
  }
}
