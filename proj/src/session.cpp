#include "httpmbt/session.hpp"

#include <fstream>
#include <stdexcept>

#include "httpmbt/trace_io.hpp"

namespace httpmbt {

void validate(const RunConfig& cfg) {
  if (cfg.model != "http" && cfg.model != "proxy")
    throw std::invalid_argument("model must be http or proxy");
  if (cfg.endpoint != "reference" && cfg.endpoint != "tcp" && cfg.endpoint != "scripted")
    throw std::invalid_argument("endpoint must be reference, tcp or scripted");
  if (cfg.connections < 1) throw std::invalid_argument("connections must be >= 1");
  if (cfg.budgets.max_steps <= 0 || cfg.budgets.retries <= 0 || cfg.budgets.poll_ms <= 0 ||
      cfg.budgets.max_branches <= 0 || cfg.budgets.timeout_s <= 0)
    throw std::invalid_argument("budgets must be positive");
  if (cfg.fixture != "literal" && cfg.fixture != "symbolic")
    throw std::invalid_argument("fixture must be literal or symbolic");
  if (cfg.mutant) {
    std::optional<Mutant> m = mutant_from_name(*cfg.mutant);
    if (!m) throw std::invalid_argument("unknown mutant: " + *cfg.mutant);
    if (is_proxy_mutant(*m) && cfg.model != "proxy")
      throw std::invalid_argument(*cfg.mutant + " runs under --model proxy");
  }
  if (cfg.endpoint == "tcp" && cfg.port == 0)
    throw std::invalid_argument("tcp endpoint needs a port");
  if (cfg.endpoint == "scripted" && cfg.script_path.empty())
    throw std::invalid_argument("scripted endpoint needs a script file");
}

Fixture fixture_of(const RunConfig&) { return Fixture::standard(); }

Model build_model(const RunConfig& cfg) {
  if (cfg.model == "proxy") return composed(proxy_model());
  Fixture f = fixture_of(cfg);
  Model server =
      cfg.fixture == "symbolic" ? http_server_symbolic(f) : http_server(literal_state(f));
  return composed(std::move(server));
}

TesterModel build_tester(const RunConfig& cfg) {
  DeriveConfig dc;
  dc.client_conns = cfg.connections;
  dc.strict_status = cfg.strict_status;
  return derive_tester(build_model(cfg), dc);
}

std::unique_ptr<EndpointIO> build_endpoint(const RunConfig& cfg) {
  if (cfg.endpoint == "reference") {
    std::optional<Mutant> m;
    if (cfg.mutant) m = mutant_from_name(*cfg.mutant);
    if (m && is_proxy_mutant(*m)) return std::make_unique<ReferenceProxyEndpoint>(true);
    if (cfg.model == "proxy") return std::make_unique<ReferenceProxyEndpoint>(false);
    return std::make_unique<ReferenceServerEndpoint>(fixture_of(cfg), m, cfg.seed);
  }
  if (cfg.endpoint == "scripted") {
    std::ifstream f(cfg.script_path);
    if (!f) throw std::invalid_argument("cannot read script: " + cfg.script_path);
    return std::make_unique<ScriptedEndpoint>(ScriptedEndpoint::parse(f));
  }
  return std::make_unique<SocketEndpoint>(cfg.host, cfg.port, cfg.origin_port);
}

Verdict run_session(const RunConfig& cfg) {
  validate(cfg);
  TesterModel tester = build_tester(cfg);
  std::unique_ptr<EndpointIO> io = build_endpoint(cfg);
  GenHook gen = make_generator(cfg.seed, cfg.gen, fixture_of(cfg), cfg.connections);
  Verdict v = run(tester, *io, cfg.budgets, gen, cfg.connections);
  if (!cfg.trace_out.empty()) save_trace_file(cfg.trace_out, v.trace);
  return v;
}

Verdict replay_session(const RunConfig& cfg, const TraceLog& trace) {
  validate(cfg);
  return replay_check(build_tester(cfg), trace, cfg.budgets);
}

}  // namespace httpmbt
