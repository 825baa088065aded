#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "httpmbt/model.hpp"

namespace httpmbt {

// One observed wire event: a complete HTTP message on a physical connection.
struct PhysPacket {
  std::uint32_t pcid = 0;
  bool outbound = true;  // tester -> SUT
  std::string raw;       // exact wire bytes
  HttpMessage msg;

  friend bool operator==(const PhysPacket& a, const PhysPacket& b) {
    return a.pcid == b.pcid && a.outbound == b.outbound && a.raw == b.raw;
  }
};

// Injective mapping from server-created model connections to the physical
// connections they showed up on. Client connections are pinned 1:1 up front
// (mcid i <-> pcid i).
class ConnMap {
 public:
  ConnMap() = default;
  explicit ConnMap(int client_conns) : client_conns_(client_conns) {}

  int client_conns() const { return client_conns_; }
  bool is_client_pcid(std::uint32_t pcid) const {
    return pcid >= 1 && pcid <= static_cast<std::uint32_t>(client_conns_);
  }

  std::optional<std::uint32_t> pcid_of(const Mcid& mc) const;
  std::optional<Mcid> mcid_of(std::uint32_t pcid) const;

  // Fig. 10 reconciliation: ok if already mapped to this pcid, binds when
  // unknown, nullopt when either side is already claimed ("Unexpected
  // connection").
  std::optional<ConnMap> bind(const Mcid& mc, std::uint32_t pcid) const;

  friend bool operator==(const ConnMap&, const ConnMap&) = default;

 private:
  int client_conns_ = 0;
  std::map<std::uint32_t, std::uint32_t> m2p_;  // server-created mcid id -> pcid
  std::map<std::uint32_t, std::uint32_t> p2m_;
};

// ---------------------------------------------------------------------------
// Observer model: the dual of a server model. Sends become expectations,
// receives become generation points, branches become determine nodes with
// unify prefixes.

class Observer;
struct ObserverStep;

class Observer {
 public:
  Observer();
  static Observer defer(std::function<ObserverStep()> thunk);
  ObserverStep step() const;

 private:
  std::shared_ptr<const std::function<ObserverStep()>> thunk_;
};

struct ObsEmitGen {
  std::function<Observer(const Packet&)> k;  // receives the generated packet
};
struct ObsExpect {
  Packet expected;
  Observer next;
};
struct ObsUnify {
  BoolExpr cond;
  bool expected;
  Observer next;
};
struct ObsDetermine {
  Observer first;
  Observer second;
};
struct ObsFresh {
  SymKind kind;
  std::function<Observer(SymVar)> k;
};
struct ObsFail {
  std::string reason;
};
struct ObsTau {
  Observer next;
};

struct ObserverStep : std::variant<ObsEmitGen, ObsExpect, ObsUnify, ObsDetermine, ObsFresh,
                                   ObsFail, ObsTau> {
  using variant::variant;
};

Observer dualize(const Model& m);

// ---------------------------------------------------------------------------
// Tester model: the observer with symbolic events instantiated. Stepping is
// parameterized by the shared generation context so that all branches at the
// same position see the identical candidate packet.

struct GenCtx {
  std::shared_ptr<const PhysPacket> next;  // the packet the tester would send here
};

class TesterModel;
struct TesterStep;

class TesterModel {
 public:
  TesterModel();
  static TesterModel defer(std::function<TesterStep(const GenCtx&)> thunk);
  TesterStep step(const GenCtx& ctx) const;

 private:
  std::shared_ptr<const std::function<TesterStep(const GenCtx&)>> thunk_;
};

struct TStepEmit {
  PhysPacket pkt;
  TesterModel next;
  ConstraintStore store;  // branch snapshot, for diagnostics
  ConnMap conns;
};
struct TStepExpect {
  std::function<TesterModel(const PhysPacket&)> k;
  ConstraintStore store;
  ConnMap conns;
};
struct TStepDetermine {
  TesterModel first;
  TesterModel second;
};
struct TStepFail {
  std::string reason;
};
struct TStepTau {
  TesterModel next;
};

struct TesterStep
    : std::variant<TStepEmit, TStepExpect, TStepDetermine, TStepFail, TStepTau> {
  using variant::variant;
};

struct DeriveConfig {
  int client_conns = 3;
  bool strict_status = false;
};

// Field-wise packet check (Fig. 10's guard): status (2xx-lenient unless
// strict), symbolic ETag unification, byte-exact body, model headers present
// in the observation, plus connection reconciliation.
std::variant<std::pair<ConstraintStore, ConnMap>, std::string> guard_packet(
    const Packet& model_pkt, const PhysPacket& observed, const ConstraintStore& store,
    const ConnMap& map, const DeriveConfig& cfg);

// Interprets an outbound physical packet as a model packet under a branch's
// connection map; nullopt when the branch has no model connection for it.
std::optional<Packet> phys_to_model(const PhysPacket& p, const ConnMap& map);

TesterModel unifier(Observer o, ConnMap map, ConstraintStore vars, DeriveConfig cfg);

// dualize + unifier over an empty store.
TesterModel derive_tester(const Model& m, const DeriveConfig& cfg);

}  // namespace httpmbt
