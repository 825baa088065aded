#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "httpmbt/etag.hpp"

namespace httpmbt {

struct HeaderField {
  std::string name;
  std::string value;

  friend bool operator==(const HeaderField&, const HeaderField&) = default;
};

// Case-insensitive header name comparison (field values compare byte-exact).
bool header_name_is(std::string_view name, std::string_view expected);

struct HttpRequest {
  std::string method;  // GET or PUT
  std::string target;
  std::vector<HeaderField> headers;  // verbatim, in wire order
  std::string body;

  const std::string* header(std::string_view name) const;

  friend bool operator==(const HttpRequest&, const HttpRequest&) = default;
};

struct HttpResponse {
  int status = 0;
  std::string reason;  // not significant for equality
  std::vector<HeaderField> headers;
  std::string body;

  const std::string* header(std::string_view name) const;

  friend bool operator==(const HttpResponse& a, const HttpResponse& b) {
    return a.status == b.status && a.headers == b.headers && a.body == b.body;
  }
};

using HttpMessage = std::variant<HttpRequest, HttpResponse>;

std::string encode(const HttpRequest& r);
std::string encode(const HttpResponse& r);
std::string encode(const HttpMessage& m);

struct Decoded {
  HttpMessage msg;
  std::size_t consumed = 0;  // bytes of the buffer holding this message
};
struct NeedMore {};
struct Malformed {
  std::string reason;
};
using DecodeResult = std::variant<Decoded, NeedMore, Malformed>;

// Incremental: consumes exactly one message from the front of `buf`,
// NeedMore on a strict prefix, Malformed on grammar violations (bad start
// line, bad Content-Length, bare-LF line endings). A message body is framed
// by Content-Length; absent Content-Length means an empty body.
DecodeResult decode(std::string_view buf);

enum class PrecondKind { if_match, if_none_match };

struct Precond {
  PrecondKind kind = PrecondKind::if_match;
  ETag tag;

  friend bool operator==(const Precond&, const Precond&) = default;
};

const char* precond_header_name(PrecondKind k);

// Convenience builders used by the reference servers and tests.
HttpRequest make_get(std::string target, std::optional<ETag> if_none_match = std::nullopt);
HttpRequest make_put(std::string target, std::string body,
                     std::optional<Precond> precond = std::nullopt);
HttpResponse make_response(int status, std::optional<ETag> etag, std::string body);

const char* default_reason(int status);

}  // namespace httpmbt
