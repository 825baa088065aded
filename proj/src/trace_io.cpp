#include "httpmbt/trace_io.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace httpmbt {

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::string_view data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= data.size()) {
    unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                 (static_cast<unsigned char>(data[i + 1]) << 8) |
                 static_cast<unsigned char>(data[i + 2]);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
    i += 3;
  }
  if (i + 1 == data.size()) {
    unsigned v = static_cast<unsigned char>(data[i]) << 16;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == data.size()) {
    unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                 (static_cast<unsigned char>(data[i + 1]) << 8);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  auto val = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::string out;
  int acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    int v = val(c);
    if (v < 0) throw std::runtime_error("invalid base64");
    acc = (acc << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += static_cast<char>((acc >> bits) & 0xff);
    }
  }
  return out;
}

void write_trace(std::ostream& out, const TraceLog& trace) {
  for (const TraceRecord& r : trace) {
    nlohmann::json j{
        {"seq", r.seq},          {"time_ms", r.time_ms},
        {"pcid", r.pcid},        {"dir", r.outbound ? "out" : "in"},
        {"raw", base64_encode(r.raw)}, {"summary", r.summary},
    };
    out << j.dump() << '\n';
  }
}

TraceLog read_trace(std::istream& in) {
  TraceLog trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    TraceRecord r;
    r.seq = j.at("seq").get<std::uint64_t>();
    r.time_ms = j.at("time_ms").get<std::int64_t>();
    r.pcid = j.at("pcid").get<std::uint32_t>();
    r.outbound = j.at("dir").get<std::string>() == "out";
    r.raw = base64_decode(j.at("raw").get<std::string>());
    r.summary = j.value("summary", "");
    trace.push_back(std::move(r));
  }
  return trace;
}

void save_trace_file(const std::string& path, const TraceLog& trace) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write trace file: " + path);
  write_trace(f, trace);
}

TraceLog load_trace_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read trace file: " + path);
  return read_trace(f);
}

}  // namespace httpmbt
