#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "httpmbt/http.hpp"
#include "httpmbt/http_model.hpp"
#include "httpmbt/trace.hpp"

namespace httpmbt {

// Hand-written single-connection checker, kept as an independent
// cross-validation oracle for the derived tester on linear traces. It tracks
// three kinds of knowledge per path: the stored value, what the ETag is
// known to equal, and tags the ETag is known to differ from.
struct OracleState {
  std::map<std::string, std::string> data;          // absent = unknown
  std::map<std::string, ETag> is;                   // absent = unknown
  std::map<std::string, std::vector<ETag>> is_not;  // entries come from 412 responses

  static OracleState from_fixture(const Fixture& f);
};

struct OracleVerdict {
  bool accept = true;
  std::size_t reject_index = 0;  // exchange index when rejected
  std::string reason;
};

using Exchange = std::pair<HttpRequest, HttpResponse>;

OracleVerdict oracle_check(const std::vector<Exchange>& trace, OracleState st);

// Pairs a recorded session into request/response exchanges on one logical
// connection; nullopt when the trace does not alternate out/in or a record
// fails to decode (itself a reject).
std::optional<std::vector<Exchange>> pair_trace(const TraceLog& trace);

}  // namespace httpmbt
