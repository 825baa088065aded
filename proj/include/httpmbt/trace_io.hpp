#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "httpmbt/trace.hpp"

namespace httpmbt {

std::string base64_encode(std::string_view data);
std::string base64_decode(std::string_view text);

// One self-describing JSON record per line:
// {"dir":"out","pcid":1,"raw":"<base64>","seq":0,"summary":"GET /a","time_ms":0}
void write_trace(std::ostream& out, const TraceLog& trace);
TraceLog read_trace(std::istream& in);

void save_trace_file(const std::string& path, const TraceLog& trace);
TraceLog load_trace_file(const std::string& path);

}  // namespace httpmbt
