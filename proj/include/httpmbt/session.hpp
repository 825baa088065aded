#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "httpmbt/exec.hpp"
#include "httpmbt/harness.hpp"
#include "httpmbt/net_model.hpp"

namespace httpmbt {

// Everything one tester invocation needs. Mirrors the CLI flags.
struct RunConfig {
  std::string model = "http";         // http | proxy
  std::string endpoint = "reference"; // reference | tcp | scripted
  std::string host = "localhost";
  std::uint16_t port = 0;
  std::optional<std::uint16_t> origin_port;  // listener for SUT-initiated connections
  std::optional<std::string> mutant;         // reference endpoint only
  std::string script_path;                   // scripted endpoint only
  std::uint64_t seed = 1;
  Budgets budgets;
  int connections = 3;
  std::string trace_out;  // write the TraceLog here when nonempty
  bool strict_status = false;
  std::string fixture = "literal";  // literal | symbolic initial tags
  GenConfig gen;
};

// Throws std::invalid_argument on out-of-range values or unknown names.
void validate(const RunConfig& cfg);

Fixture fixture_of(const RunConfig& cfg);

// The composed client-side model (server or proxy behind the tcp model).
Model build_model(const RunConfig& cfg);

TesterModel build_tester(const RunConfig& cfg);

std::unique_ptr<EndpointIO> build_endpoint(const RunConfig& cfg);

// Build everything from the config, run, and write the trace file if asked.
Verdict run_session(const RunConfig& cfg);

// replay_check against the model/budgets described by the config.
Verdict replay_session(const RunConfig& cfg, const TraceLog& trace);

}  // namespace httpmbt
