#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "httpmbt/oracle.hpp"
#include "httpmbt/session.hpp"
#include "httpmbt/trace_io.hpp"

namespace py = pybind11;

namespace {

httpmbt::RunConfig config_from_kwargs(const py::kwargs& kw) {
  httpmbt::RunConfig cfg;
  for (auto item : kw) {
    std::string key = py::str(item.first);
    if (key == "model") cfg.model = py::cast<std::string>(item.second);
    else if (key == "endpoint") cfg.endpoint = py::cast<std::string>(item.second);
    else if (key == "host") cfg.host = py::cast<std::string>(item.second);
    else if (key == "port") cfg.port = py::cast<std::uint16_t>(item.second);
    else if (key == "origin_port") cfg.origin_port = py::cast<std::uint16_t>(item.second);
    else if (key == "mutant") cfg.mutant = py::cast<std::string>(item.second);
    else if (key == "script") cfg.script_path = py::cast<std::string>(item.second);
    else if (key == "seed") cfg.seed = py::cast<std::uint64_t>(item.second);
    else if (key == "max_steps") cfg.budgets.max_steps = py::cast<int>(item.second);
    else if (key == "retries") cfg.budgets.retries = py::cast<int>(item.second);
    else if (key == "poll_ms") cfg.budgets.poll_ms = py::cast<int>(item.second);
    else if (key == "max_branches") cfg.budgets.max_branches = py::cast<int>(item.second);
    else if (key == "timeout_s") cfg.budgets.timeout_s = py::cast<double>(item.second);
    else if (key == "connections") cfg.connections = py::cast<int>(item.second);
    else if (key == "trace_out") cfg.trace_out = py::cast<std::string>(item.second);
    else if (key == "strict_status") cfg.strict_status = py::cast<bool>(item.second);
    else if (key == "fixture") cfg.fixture = py::cast<std::string>(item.second);
    else throw std::invalid_argument("unknown option: " + key);
  }
  return cfg;
}

py::dict verdict_to_dict(const httpmbt::Verdict& v) {
  py::dict d;
  d["verdict"] = httpmbt::verdict_name(v.kind);
  d["steps"] = v.steps;
  d["reasons"] = v.reasons;
  d["detail"] = v.detail;
  py::list events;
  for (const auto& r : v.trace) {
    py::dict e;
    e["seq"] = r.seq;
    e["pcid"] = r.pcid;
    e["dir"] = r.outbound ? "out" : "in";
    e["summary"] = r.summary;
    events.append(e);
  }
  d["trace"] = events;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Model-derived conformance tester for an HTTP/1.1 subset";

  m.def(
      "run",
      [](const py::kwargs& kw) { return verdict_to_dict(httpmbt::run_session(config_from_kwargs(kw))); },
      "Derive the tester from the configured model and run it against the "
      "configured endpoint. Returns a verdict dict.");

  m.def(
      "replay",
      [](const std::string& trace_path, const py::kwargs& kw) {
        httpmbt::RunConfig cfg = config_from_kwargs(kw);
        return verdict_to_dict(httpmbt::replay_session(cfg, httpmbt::load_trace_file(trace_path)));
      },
      py::arg("trace_path"), "Re-judge a recorded trace file against the model.");

  m.def(
      "oracle_check",
      [](const std::string& trace_path) {
        httpmbt::TraceLog trace = httpmbt::load_trace_file(trace_path);
        auto exchanges = httpmbt::pair_trace(trace);
        py::dict d;
        if (!exchanges) {
          d["accept"] = false;
          d["reason"] = "trace is not an alternating request/response session";
          return d;
        }
        auto v = httpmbt::oracle_check(
            *exchanges, httpmbt::OracleState::from_fixture(httpmbt::Fixture::standard()));
        d["accept"] = v.accept;
        d["reject_index"] = v.reject_index;
        d["reason"] = v.reason;
        return d;
      },
      py::arg("trace_path"),
      "Judge a single-connection trace with the hand-written checker.");

  m.def(
      "strong_compare",
      [](const std::string& a, const std::string& b) {
        auto ta = httpmbt::parse_etag(a);
        auto tb = httpmbt::parse_etag(b);
        if (!ta || !tb) throw std::invalid_argument("bad ETag literal");
        return httpmbt::strong_compare(*ta, *tb);
      },
      "RFC 7232 strong comparison of two ETag literals (e.g. '\"x\"', 'W/\"x\"').");

  m.def(
      "weak_compare",
      [](const std::string& a, const std::string& b) {
        auto ta = httpmbt::parse_etag(a);
        auto tb = httpmbt::parse_etag(b);
        if (!ta || !tb) throw std::invalid_argument("bad ETag literal");
        return httpmbt::weak_compare(*ta, *tb);
      },
      "RFC 7232 weak comparison of two ETag literals.");

  m.def("mutants", [] {
    py::list out;
    for (auto mu : httpmbt::all_mutants()) out.append(httpmbt::mutant_name(mu));
    return out;
  });
}
