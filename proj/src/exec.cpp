#include "httpmbt/exec.hpp"

#include <algorithm>
#include <chrono>
#include <map>

namespace httpmbt {

const char* verdict_name(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::accept: return "accept";
    case Verdict::Kind::reject: return "reject";
    case Verdict::Kind::inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

void expand_one(const TesterModel& t, std::vector<std::string> trail, const GenCtx& ctx,
                const Budgets& b, Wave& out) {
  if (out.over_budget) return;
  TesterModel cur = t;
  int taus = 0;
  for (;;) {
    TesterStep s = cur.step(ctx);
    if (auto* tau = std::get_if<TStepTau>(&s)) {
      if (++taus > b.tau_bound) {
        out.failures.push_back("unproductive model");
        return;
      }
      cur = tau->next;
      continue;
    }
    if (auto* det = std::get_if<TStepDetermine>(&s)) {
      auto trail_true = trail;
      trail_true.push_back("then");
      expand_one(det->first, std::move(trail_true), ctx, b, out);
      if (out.over_budget) return;
      trail.push_back("else");
      cur = det->second;
      taus = 0;
      continue;
    }
    if (auto* fail = std::get_if<TStepFail>(&s)) {
      out.failures.push_back(fail->reason);
      return;
    }
    if (out.fronts.size() >= static_cast<std::size_t>(b.max_branches)) {
      out.over_budget = true;
      return;
    }
    Branch br;
    br.trail = std::move(trail);
    if (auto* emit = std::get_if<TStepEmit>(&s)) {
      br.is_emit = true;
      br.emit_pkt = emit->pkt;
      br.after_emit = emit->next;
      br.store = emit->store;
      br.conns = emit->conns;
    } else {
      auto& exp = std::get<TStepExpect>(s);
      br.is_emit = false;
      br.recv_k = exp.k;
      br.store = exp.store;
      br.conns = exp.conns;
    }
    out.fronts.push_back(std::move(br));
    return;
  }
}

}  // namespace

Wave expand(const std::vector<PendingBranch>& pending, const GenCtx& ctx, const Budgets& b) {
  Wave w;
  for (const PendingBranch& p : pending) {
    expand_one(p.t, p.trail, ctx, b, w);
    if (w.over_budget) break;
  }
  return w;
}

GenHook make_generator(std::uint64_t seed, const GenConfig& cfg, const Fixture& fixture,
                       int client_conns) {
  return [seed, cfg, fixture, client_conns](const TraceLog& trace, std::uint64_t position) {
    return gen_packet(derive_gen_state(trace, seed, position, cfg, fixture, client_conns));
  };
}

void StreamReassembler::feed(std::uint32_t pcid, std::string_view bytes) {
  buf_[pcid].append(bytes);
}

std::optional<StreamReassembler::Message> StreamReassembler::pop() {
  for (auto& [pcid, data] : buf_) {
    if (data.empty()) continue;
    DecodeResult r = decode(data);
    if (std::holds_alternative<NeedMore>(r)) continue;
    Message m;
    m.pcid = pcid;
    if (auto* bad = std::get_if<Malformed>(&r)) {
      m.malformed = true;
      m.error = bad->reason;
      m.raw = data;
      data.clear();
      return m;
    }
    auto& ok = std::get<Decoded>(r);
    m.raw = data.substr(0, ok.consumed);
    m.msg = std::move(ok.msg);
    data.erase(0, ok.consumed);
    return m;
  }
  return std::nullopt;
}

namespace {

TraceRecord make_record(std::uint64_t seq, std::int64_t time_ms, std::uint32_t pcid,
                        bool outbound, std::string raw, const HttpMessage* msg) {
  TraceRecord r;
  r.seq = seq;
  r.time_ms = time_ms;
  r.pcid = pcid;
  r.outbound = outbound;
  r.raw = std::move(raw);
  r.summary = msg ? summarize(*msg) : "<malformed>";
  return r;
}

GenCtx ctx_of(PhysPacket pkt) {
  return GenCtx{std::make_shared<const PhysPacket>(std::move(pkt))};
}

std::vector<std::string> tail_of(std::vector<std::string> v, std::size_t n = 24) {
  if (v.size() > n) v.erase(v.begin(), v.end() - n);
  return v;
}

}  // namespace

Verdict run(const TesterModel& t0, EndpointIO& io, const Budgets& budgets, const GenHook& gen,
            int client_conns) {
  using clock = std::chrono::steady_clock;
  const auto deadline =
      clock::now() + std::chrono::milliseconds(static_cast<std::int64_t>(budgets.timeout_s * 1e3));

  Verdict v;
  try {
    for (int i = 0; i < client_conns; ++i) io.open_connection();

    std::vector<PendingBranch> pending{{t0, {}}};
    StreamReassembler rx;
    int events = 0;
    int silent = 0;
    Wave wave;
    bool wave_valid = false;
    GenCtx ctx;

    for (;;) {
      if (clock::now() > deadline) {
        v.kind = Verdict::Kind::inconclusive;
        v.detail = "timeout";
        break;
      }
      if (!wave_valid) {
        ctx = ctx_of(gen(v.trace, static_cast<std::uint64_t>(events)));
        wave = expand(pending, ctx, budgets);
        wave_valid = true;
        if (wave.over_budget) {
          v.kind = Verdict::Kind::inconclusive;
          v.detail = "max_branches";
          break;
        }
        if (wave.fronts.empty()) {
          v.kind = Verdict::Kind::reject;
          v.reasons = tail_of(std::move(wave.failures));
          break;
        }
      }
      if (events >= budgets.max_steps) {
        v.kind = Verdict::Kind::accept;
        break;
      }

      // Prefer processing arrivals; their explanations are always present
      // because the network model can absorb at any point.
      std::optional<StreamReassembler::Message> arrived = rx.pop();
      if (!arrived) {
        int wait = wave.fronts.front().is_emit ? 0 : budgets.poll_ms;
        if (auto chunk = io.maybe_recv(wait)) {
          rx.feed(chunk->pcid, chunk->bytes);
          arrived = rx.pop();
        }
      }

      if (arrived) {
        v.trace.push_back(make_record(v.trace.size(), io.now_ms(), arrived->pcid, false,
                                      arrived->raw, arrived->malformed ? nullptr : &arrived->msg));
        if (arrived->malformed) {
          v.kind = Verdict::Kind::reject;
          v.reasons = {"SUT sent undecodable bytes: " + arrived->error};
          break;
        }
        PhysPacket pkt{arrived->pcid, false, std::move(arrived->raw), std::move(arrived->msg)};
        std::vector<PendingBranch> next;
        for (Branch& br : wave.fronts) {
          if (br.is_emit) continue;
          next.push_back({br.recv_k(pkt), std::move(br.trail)});
        }
        ++events;
        silent = 0;
        if (next.empty()) {
          v.kind = Verdict::Kind::reject;
          v.reasons = {"no live branch was expecting to receive (got " +
                       summarize(pkt.msg) + " on pcid " + std::to_string(pkt.pcid) + ")"};
          break;
        }
        pending = std::move(next);
        wave_valid = false;
        continue;
      }

      Branch& front = wave.fronts.front();
      if (front.is_emit) {
        const PhysPacket& pkt = front.emit_pkt;
        io.send(pkt.pcid, pkt.raw);
        v.trace.push_back(
            make_record(v.trace.size(), io.now_ms(), pkt.pcid, true, pkt.raw, &pkt.msg));
        std::vector<PendingBranch> next;
        for (Branch& br : wave.fronts) {
          if (!br.is_emit || !(br.emit_pkt == pkt)) continue;
          next.push_back({br.after_emit, std::move(br.trail)});
        }
        ++events;
        silent = 0;
        pending = std::move(next);
        wave_valid = false;
        continue;
      }

      // Front expects but nothing arrived: retry, then postpone in favor of
      // a branch that can make progress by sending.
      if (++silent > budgets.retries) {
        auto it = std::find_if(wave.fronts.begin(), wave.fronts.end(),
                               [](const Branch& b) { return b.is_emit; });
        if (it == wave.fronts.end()) {
          v.kind = Verdict::Kind::inconclusive;
          v.detail = "retries exhausted waiting for the SUT";
          break;
        }
        std::rotate(wave.fronts.begin(), it, wave.fronts.end());
        silent = 0;
      }
    }
    v.steps = static_cast<int>(v.trace.size());
  } catch (const endpoint_error& e) {
    v.kind = Verdict::Kind::inconclusive;
    v.detail = std::string("endpoint error: ") + e.what();
    v.steps = static_cast<int>(v.trace.size());
  }
  io.close();
  return v;
}

// ---------------------------------------------------------------------------

namespace {

// Benign placeholder for expansions at positions where the next event is not
// a tester send; emit fronts built from it are dropped by the event filter.
PhysPacket sentinel_packet() {
  HttpRequest r = make_get("/");
  PhysPacket p;
  p.pcid = 1;
  p.outbound = true;
  p.raw = encode(r);
  p.msg = std::move(r);
  return p;
}

}  // namespace

ReplaySession::ReplaySession(TesterModel t0, Budgets budgets)
    : budgets_(budgets), pending_{{std::move(t0), {}}} {}

ReplaySession::Status ReplaySession::feed(const TraceRecord& rec) {
  if (status_ != Status::alive) return status_;

  PhysPacket pkt;
  pkt.pcid = rec.pcid;
  pkt.outbound = rec.outbound;
  pkt.raw = rec.raw;
  DecodeResult d = decode(rec.raw);
  if (auto* ok = std::get_if<Decoded>(&d)) {
    pkt.msg = std::move(ok->msg);
  } else {
    status_ = Status::rejected;
    reasons_ = {"trace record " + std::to_string(rec.seq) + " is not a decodable message"};
    return status_;
  }

  GenCtx ctx = rec.outbound ? ctx_of(pkt) : ctx_of(sentinel_packet());
  Wave wave = expand(pending_, ctx, budgets_);
  if (wave.over_budget) {
    status_ = Status::inconclusive;
    reasons_ = {"max_branches"};
    return status_;
  }
  if (wave.fronts.empty()) {
    status_ = Status::rejected;
    reasons_ = tail_of(std::move(wave.failures));
    return status_;
  }

  std::vector<PendingBranch> next;
  for (Branch& br : wave.fronts) {
    if (rec.outbound) {
      if (br.is_emit && br.emit_pkt == pkt)
        next.push_back({br.after_emit, std::move(br.trail)});
    } else {
      if (!br.is_emit) next.push_back({br.recv_k(pkt), std::move(br.trail)});
    }
  }
  if (next.empty()) {
    status_ = Status::rejected;
    reasons_ = {rec.outbound ? "no branch could send the recorded packet"
                             : "no branch was expecting to receive"};
    return status_;
  }
  pending_ = std::move(next);
  return status_;
}

ReplaySession::Status ReplaySession::probe() const {
  if (status_ != Status::alive) return status_;
  Wave wave = expand(pending_, ctx_of(sentinel_packet()), budgets_);
  if (wave.over_budget) return Status::inconclusive;
  return wave.fronts.empty() ? Status::rejected : Status::alive;
}

Verdict replay_check(const TesterModel& t0, const TraceLog& trace, const Budgets& budgets) {
  ReplaySession session(t0, budgets);
  Verdict v;
  v.trace = trace;
  for (const TraceRecord& rec : trace) {
    if (session.feed(rec) != ReplaySession::Status::alive) break;
  }
  ReplaySession::Status final_status = session.status() == ReplaySession::Status::alive
                                           ? session.probe()
                                           : session.status();
  switch (final_status) {
    case ReplaySession::Status::alive: v.kind = Verdict::Kind::accept; break;
    case ReplaySession::Status::rejected: v.kind = Verdict::Kind::reject; break;
    case ReplaySession::Status::inconclusive: v.kind = Verdict::Kind::inconclusive; break;
  }
  v.steps = static_cast<int>(trace.size());
  v.reasons = session.failure_reasons();
  if (final_status == ReplaySession::Status::rejected && v.reasons.empty())
    v.reasons = {"all branches failed while flushing the final event"};
  if (final_status == ReplaySession::Status::inconclusive) v.detail = "max_branches";
  return v;
}

}  // namespace httpmbt
