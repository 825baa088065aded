#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace httpmbt {

// Entity tag. `opaque` holds the quoted-string content without the quotes;
// quotes and control bytes are not permitted inside it.
struct ETag {
  bool weak = false;
  std::string opaque;

  friend bool operator==(const ETag&, const ETag&) = default;
  friend auto operator<=>(const ETag&, const ETag&) = default;
};

// RFC 7232 comparison: strong requires both tags strong and byte-equal
// opaque parts; weak ignores the weakness flags.
bool strong_compare(const ETag& a, const ETag& b);
bool weak_compare(const ETag& a, const ETag& b);

bool valid_opaque(std::string_view s);

// Wire form: optional `W/` prefix followed by the quoted opaque part.
std::string format_etag(const ETag& t);
std::optional<ETag> parse_etag(std::string_view s);

}  // namespace httpmbt
