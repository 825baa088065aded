#pragma once

#include <cstdint>
#include <deque>
#include <istream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "httpmbt/exec.hpp"
#include "httpmbt/http_model.hpp"

namespace httpmbt {

// Injected-bug catalog for the reference implementations. Each entry perturbs
// exactly one behavior of the otherwise correct server/proxy.
enum class Mutant {
  inm_strong,         // If-None-Match evaluated with strong comparison
  put_skip_precond,   // PUT preconditions not checked at all
  wrong_target_write, // PUT stores the value under a different path
  no_304,             // 200 where 304 is due
  missing_404,        // nonsense response on absent targets
  stale_etag,         // PUT success reports the previous ETag
  swap_304_412,       // 304 and 412 exchanged
  body_off_by_one,    // 200 bodies truncated by one byte
  proxy_body_corrupt, // proxy flips a byte when forwarding
  constant_etag,      // one fixed ETag reported for every resource
};

const char* mutant_name(Mutant m);
std::optional<Mutant> mutant_from_name(std::string_view name);
const std::vector<Mutant>& all_mutants();
// proxy mutants run under the proxy model, the rest under the http model
bool is_proxy_mutant(Mutant m);

// One-byte corruption of a forwarded message (the proxy_body_corrupt
// behavior): in the body when there is one, otherwise in the request target.
std::string corrupt_forwarded_message(std::string raw);

// Concrete, correct HTTP/1.1 subset server (ETags minted from a seeded
// stream) with the mutant hook points.
class ServerCore {
 public:
  ServerCore(const Fixture& fixture, std::optional<Mutant> mutant, std::uint64_t etag_seed);

  HttpResponse handle(const HttpRequest& req);

  const std::string* value_of(const std::string& path) const;
  const ETag* tag_of(const std::string& path) const;

 private:
  ETag mint();
  HttpResponse do_get(const HttpRequest& req);
  HttpResponse do_put(const HttpRequest& req);
  HttpResponse finish(HttpResponse resp);

  std::map<std::string, std::string> data_;
  std::map<std::string, ETag> tags_;
  std::optional<Mutant> mutant_;
  std::mt19937_64 rng_;
  int mint_counter_ = 0;
};

// In-process reference server behind the EndpointIO interface. Requests are
// processed synchronously on send(), so runs are deterministic.
class ReferenceServerEndpoint : public EndpointIO {
 public:
  ReferenceServerEndpoint(const Fixture& fixture, std::optional<Mutant> mutant,
                          std::uint64_t etag_seed);

  std::uint32_t open_connection() override;
  void send(std::uint32_t pcid, std::string_view bytes) override;
  std::optional<RecvChunk> maybe_recv(int wait_ms) override;
  std::int64_t now_ms() override { return clock_++; }

 private:
  ServerCore core_;
  StreamReassembler rx_;
  std::deque<RecvChunk> out_;
  std::uint32_t next_pcid_ = 0;
  std::int64_t clock_ = 0;
};

// In-process reference proxy: forwards each complete message verbatim on a
// fresh SUT-initiated connection; replies on such a connection go back to
// the client connection the forward originated from.
class ReferenceProxyEndpoint : public EndpointIO {
 public:
  explicit ReferenceProxyEndpoint(bool corrupt_forwards);

  std::uint32_t open_connection() override;
  void send(std::uint32_t pcid, std::string_view bytes) override;
  std::optional<RecvChunk> maybe_recv(int wait_ms) override;
  std::int64_t now_ms() override { return clock_++; }

 private:
  bool corrupt_;
  StreamReassembler rx_;
  std::deque<RecvChunk> out_;
  std::map<std::uint32_t, std::uint32_t> fwd_origin_;  // sut pcid -> client pcid
  std::uint32_t client_count_ = 0;
  std::uint32_t next_sut_pcid_ = 1000;
  std::int64_t clock_ = 0;
};

// Replays a fixed SUT-side script: `send` steps are delivered to the tester
// as soon as they reach the script front; `expect` steps wait for a tester
// message (pcid 0 or empty bytes act as wildcards). Deviation or exhaustion
// closes the endpoint.
struct ScriptStep {
  enum class Kind { expect, send } kind = Kind::expect;
  std::uint32_t pcid = 0;  // for expect: 0 matches any connection
  std::string raw;         // for expect: empty matches any message
};

class ScriptedEndpoint : public EndpointIO {
 public:
  explicit ScriptedEndpoint(std::vector<ScriptStep> script);

  static std::vector<ScriptStep> parse(std::istream& in);

  std::uint32_t open_connection() override;
  void send(std::uint32_t pcid, std::string_view bytes) override;
  std::optional<RecvChunk> maybe_recv(int wait_ms) override;
  std::int64_t now_ms() override { return clock_++; }

 private:
  void advance();

  std::vector<ScriptStep> script_;
  std::size_t pos_ = 0;
  bool closed_ = false;
  StreamReassembler rx_;
  std::deque<RecvChunk> out_;
  std::uint32_t next_pcid_ = 0;
  std::int64_t clock_ = 0;
};

// Real TCP endpoint: non-blocking sockets toward a SUT, plus an optional
// listener for SUT-initiated connections (proxy forwarding).
class SocketEndpoint : public EndpointIO {
 public:
  SocketEndpoint(const std::string& host, std::uint16_t port,
                 std::optional<std::uint16_t> origin_listen_port);
  ~SocketEndpoint() override;

  std::uint32_t open_connection() override;
  void send(std::uint32_t pcid, std::string_view bytes) override;
  std::optional<RecvChunk> maybe_recv(int wait_ms) override;
  std::int64_t now_ms() override;
  void close() override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Reserves an ephemeral loopback port (bind to 0, read it back, release).
std::uint16_t pick_free_port();

// Serves a reference SUT over real TCP on a background thread, for socket
// endpoint tests and the `serve` subcommand.
class SocketSut {
 public:
  // kind: correct/mutated server, or a proxy dialing back to origin_port.
  static std::unique_ptr<SocketSut> serve_http(const Fixture& fixture,
                                               std::optional<Mutant> mutant,
                                               std::uint64_t etag_seed, std::uint16_t port);
  static std::unique_ptr<SocketSut> serve_proxy(std::uint16_t port, const std::string& origin_host,
                                                std::uint16_t origin_port, bool corrupt);
  ~SocketSut();

  std::uint16_t port() const;

 private:
  SocketSut();
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace httpmbt
