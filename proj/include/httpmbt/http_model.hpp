#pragma once

#include <map>
#include <string>
#include <vector>

#include "httpmbt/model.hpp"

namespace httpmbt {

// Server-side resource state: concrete values plus possibly-symbolic ETags.
// Every path present in one map is present in the other.
struct ServerState {
  std::map<std::string, std::string> data;
  std::map<std::string, TagExpr> xtag;
};

struct Fixture {
  struct Entry {
    std::string path;
    std::string value;
    ETag tag;
  };
  std::vector<Entry> entries;

  // Three paths with tags the tester knows up front; /c carries a weak tag
  // so weak-vs-strong comparison differences are observable.
  static Fixture standard();
  // Two-path fixture used by the single-connection cross-validation suites.
  static Fixture small_pair();
};

ServerState literal_state(const Fixture& f);

// The symbolic HTTP/1.1 server model: receive one request at a time,
// process it, send the response, loop with the updated state.
Model http_server(ServerState st);

// Same server but with unknown initial tags: allocates a fresh tag variable
// per fixture path before entering the serve loop.
Model http_server_symbolic(const Fixture& f);

// One request/response round: runs the conditional-request logic on `req`
// and hands (response, new state) to `k`. Split out so tests can walk the
// branch structure directly.
Model process(const SymRequest& req, const ServerState& st,
              std::function<Model(SymResponse, ServerState)> k);

// Message-forwarding model: every received message is forwarded immediately;
// client messages go out on a fresh server-created connection, responses
// arriving on such a connection go back to the client connection that the
// forward came from.
Model proxy_model();

}  // namespace httpmbt
