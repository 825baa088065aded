#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "httpmbt/http.hpp"
#include "httpmbt/symbolic.hpp"

namespace httpmbt {

enum class ConnOrigin { client_accepted, server_created };

// Model-level connection identifier.
struct Mcid {
  std::uint32_t id = 0;
  ConnOrigin origin = ConnOrigin::client_accepted;

  friend bool operator==(const Mcid&, const Mcid&) = default;
  friend auto operator<=>(const Mcid&, const Mcid&) = default;
};

// Model-side request. Requests originate from the tester, so every field is
// concrete; the precondition tag is parsed out for the match logic and the
// remaining headers ride along verbatim (the proxy model forwards them).
struct SymRequest {
  std::string method;
  std::string target;
  std::optional<Precond> precond;
  std::string body;
  std::vector<HeaderField> extra_headers;  // everything but precondition/Content-Length

  friend bool operator==(const SymRequest&, const SymRequest&) = default;
};

// Model-side response. The ETag field may be symbolic: a fresh variable
// names a tag the server generates internally, to be unified against the
// concrete header observed on the wire.
struct SymResponse {
  int status = 0;
  std::optional<TagExpr> etag;
  std::string body;
  std::vector<HeaderField> extra_headers;  // everything but ETag/Content-Length

  friend bool operator==(const SymResponse&, const SymResponse&) = default;
};

using SymPayload = std::variant<SymRequest, SymResponse>;

struct Packet {
  Mcid conn;
  bool to_server = true;  // direction: toward the system under test
  SymPayload payload;

  friend bool operator==(const Packet&, const Packet&) = default;
};

// Wire <-> model conversions. `to_sym` never fails: unparseable ETag headers
// stay verbatim in extra_headers (a later guard against a symbolic ETag will
// then fail, which is the desired outcome).
SymRequest to_sym(const HttpRequest& r);
SymResponse to_sym(const HttpResponse& r);
SymPayload to_sym(const HttpMessage& m);

// Wire form of a concrete model message. Requires every TagExpr to be a
// literal; used when a model payload has to be serialized (trace summaries,
// tests).
HttpRequest to_wire(const SymRequest& r);
HttpResponse to_wire(const SymResponse& r);

std::string summarize(const HttpMessage& m);

}  // namespace httpmbt
