#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "httpmbt/derive.hpp"
#include "httpmbt/gen.hpp"
#include "httpmbt/trace.hpp"

namespace httpmbt {

// Endpoint-level faults (refused, reset, closed). Distinct from conformance
// failures: the executor reports them as Inconclusive, never Reject.
struct endpoint_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RecvChunk {
  std::uint32_t pcid = 0;
  std::string bytes;
};

// Reassembles per-connection byte streams into complete HTTP messages.
class StreamReassembler {
 public:
  struct Message {
    std::uint32_t pcid = 0;
    std::string raw;
    HttpMessage msg;
    bool malformed = false;
    std::string error;
  };

  void feed(std::uint32_t pcid, std::string_view bytes);
  std::optional<Message> pop();

 private:
  std::map<std::uint32_t, std::string> buf_;
};

// Capability record the executor drives. Per-pcid byte streams are ordered
// and reliable; maybe_recv never blocks longer than the wait it was given.
class EndpointIO {
 public:
  virtual ~EndpointIO() = default;

  virtual std::uint32_t open_connection() = 0;
  virtual void send(std::uint32_t pcid, std::string_view bytes) = 0;
  virtual std::optional<RecvChunk> maybe_recv(int wait_ms) = 0;

  // Trace timestamps. Deterministic endpoints report a logical clock so
  // equal runs produce byte-identical logs.
  virtual std::int64_t now_ms() = 0;

  virtual void close() {}
};

struct Budgets {
  int max_steps = 200;  // external events before accepting
  int retries = 50;
  int poll_ms = 2;
  int max_branches = 4096;
  double timeout_s = 60.0;
  int tau_bound = kDefaultTauBound;
};

struct Verdict {
  enum class Kind { accept, reject, inconclusive };
  Kind kind = Kind::inconclusive;
  int steps = 0;
  TraceLog trace;
  std::vector<std::string> reasons;  // per-branch diagnostics on reject
  std::string detail;                // budget kind on inconclusive

  bool accepted() const { return kind == Kind::accept; }
  bool rejected() const { return kind == Kind::reject; }
};

const char* verdict_name(Verdict::Kind k);

// A live explanation of the observed trace: a tester continuation waiting at
// an external event, with its branch-private knowledge and a trail of the
// determine decisions that led here.
struct Branch {
  bool is_emit = false;
  PhysPacket emit_pkt;  // valid when is_emit
  TesterModel after_emit;
  std::function<TesterModel(const PhysPacket&)> recv_k;  // valid when !is_emit
  ConstraintStore store;
  ConnMap conns;
  std::vector<std::string> trail;
};

// Expands pending tester continuations through Determine/internal steps into
// branches paused at external events. Failed branches are dropped and their
// reasons collected. Shared by the live executor and trace replay.
struct Wave {
  std::vector<Branch> fronts;
  std::vector<std::string> failures;
  bool over_budget = false;
};

struct PendingBranch {
  TesterModel t;
  std::vector<std::string> trail;
};

Wave expand(const std::vector<PendingBranch>& pending, const GenCtx& ctx, const Budgets& b);

// Generation hook: produces the candidate packet for a given position over
// the shared trace.
using GenHook = std::function<PhysPacket(const TraceLog&, std::uint64_t position)>;

GenHook make_generator(std::uint64_t seed, const GenConfig& cfg, const Fixture& fixture,
                       int client_conns);

// Executes the nondeterministic tester against a live endpoint (Fig. 11
// semantics: lockstep filtering on sends, retry/postpone on silent expects,
// accept after max_steps events, reject when every branch has failed).
Verdict run(const TesterModel& t0, EndpointIO& io, const Budgets& budgets, const GenHook& gen,
            int client_conns);

// Deterministic re-validation of a recorded session. Incremental so that
// enumeration-style tests can fork sessions cheaply.
class ReplaySession {
 public:
  ReplaySession(TesterModel t0, Budgets budgets);

  enum class Status { alive, rejected, inconclusive };

  Status feed(const TraceRecord& rec);
  // Expands the pending continuations to flush guards of the last event.
  Status probe() const;

  Status status() const { return status_; }
  const std::vector<std::string>& failure_reasons() const { return reasons_; }
  std::size_t live_branches() const { return pending_.size(); }

 private:
  Budgets budgets_;
  std::vector<PendingBranch> pending_;
  Status status_ = Status::alive;
  std::vector<std::string> reasons_;
};

// Full-trace convenience wrapper around ReplaySession.
Verdict replay_check(const TesterModel& t0, const TraceLog& trace, const Budgets& budgets);

}  // namespace httpmbt
