#include "httpmbt/etag.hpp"

namespace httpmbt {

bool strong_compare(const ETag& a, const ETag& b) {
  return !a.weak && !b.weak && a.opaque == b.opaque;
}

bool weak_compare(const ETag& a, const ETag& b) {
  return a.opaque == b.opaque;
}

bool valid_opaque(std::string_view s) {
  for (unsigned char c : s) {
    if (c == '"' || c < 0x21 || c == 0x7f) return false;
  }
  return true;
}

std::string format_etag(const ETag& t) {
  std::string out;
  if (t.weak) out += "W/";
  out += '"';
  out += t.opaque;
  out += '"';
  return out;
}

std::optional<ETag> parse_etag(std::string_view s) {
  ETag t;
  if (s.size() >= 2 && s[0] == 'W' && s[1] == '/') {
    t.weak = true;
    s.remove_prefix(2);
  }
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') return std::nullopt;
  s = s.substr(1, s.size() - 2);
  if (!valid_opaque(s)) return std::nullopt;
  t.opaque.assign(s);
  return t;
}

}  // namespace httpmbt
