#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace httpmbt {

// One record of the observed interaction, message-granular. The log is
// append-only and shared by every branch: it is the concrete observation the
// branches are trying to explain.
struct TraceRecord {
  std::uint64_t seq = 0;
  std::int64_t time_ms = 0;
  std::uint32_t pcid = 0;
  bool outbound = true;  // tester -> SUT
  std::string raw;       // exact bytes of one HTTP message
  std::string summary;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using TraceLog = std::vector<TraceRecord>;

}  // namespace httpmbt
