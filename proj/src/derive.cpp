#include "httpmbt/derive.hpp"

#include <sstream>

namespace httpmbt {

std::optional<std::uint32_t> ConnMap::pcid_of(const Mcid& mc) const {
  if (mc.origin == ConnOrigin::client_accepted) {
    if (mc.id >= 1 && mc.id <= static_cast<std::uint32_t>(client_conns_)) return mc.id;
    return std::nullopt;
  }
  auto it = m2p_.find(mc.id);
  if (it == m2p_.end()) return std::nullopt;
  return it->second;
}

std::optional<Mcid> ConnMap::mcid_of(std::uint32_t pcid) const {
  if (is_client_pcid(pcid)) return Mcid{pcid, ConnOrigin::client_accepted};
  auto it = p2m_.find(pcid);
  if (it == p2m_.end()) return std::nullopt;
  return Mcid{it->second, ConnOrigin::server_created};
}

std::optional<ConnMap> ConnMap::bind(const Mcid& mc, std::uint32_t pcid) const {
  if (mc.origin == ConnOrigin::client_accepted) {
    return (is_client_pcid(pcid) && mc.id == pcid) ? std::optional(*this) : std::nullopt;
  }
  if (is_client_pcid(pcid)) return std::nullopt;
  auto fwd = m2p_.find(mc.id);
  if (fwd != m2p_.end()) {
    return fwd->second == pcid ? std::optional(*this) : std::nullopt;
  }
  if (p2m_.count(pcid) > 0) return std::nullopt;  // pcid claimed by another mcid
  ConnMap next = *this;
  next.m2p_.emplace(mc.id, pcid);
  next.p2m_.emplace(pcid, mc.id);
  return next;
}

// ---------------------------------------------------------------------------

Observer::Observer()
    : thunk_(std::make_shared<const std::function<ObserverStep()>>(
          [] { return ObserverStep(ObsFail{"empty observer"}); })) {}

Observer Observer::defer(std::function<ObserverStep()> thunk) {
  Observer o;
  o.thunk_ = std::make_shared<const std::function<ObserverStep()>>(std::move(thunk));
  return o;
}

ObserverStep Observer::step() const { return (*thunk_)(); }

Observer dualize(const Model& m) {
  return Observer::defer([m]() -> ObserverStep {
    ModelStep s = m.step();
    if (auto* recv = std::get_if<StepRecv>(&s)) {
      RecvCont k = recv->k;
      return ObsEmitGen{[k](const Packet& p) { return dualize(k(p)); }};
    }
    if (auto* send = std::get_if<StepSend>(&s)) {
      return ObsExpect{send->pkt, dualize(send->next)};
    }
    if (auto* br = std::get_if<StepBranch>(&s)) {
      Observer then_side = Observer::defer([cond = br->cond, next = br->on_true] {
        return ObserverStep(ObsUnify{cond, true, dualize(next)});
      });
      Observer else_side = Observer::defer([cond = br->cond, next = br->on_false] {
        return ObserverStep(ObsUnify{cond, false, dualize(next)});
      });
      return ObsDetermine{std::move(then_side), std::move(else_side)};
    }
    if (auto* fr = std::get_if<StepFresh>(&s)) {
      SymCont k = fr->k;
      return ObsFresh{fr->kind, [k](SymVar v) { return dualize(k(v)); }};
    }
    if (auto* f = std::get_if<StepFail>(&s)) return ObsFail{f->reason};
    return ObsTau{dualize(std::get<StepTau>(s).next)};
  });
}

// ---------------------------------------------------------------------------

TesterModel::TesterModel()
    : thunk_(std::make_shared<const std::function<TesterStep(const GenCtx&)>>(
          [](const GenCtx&) { return TesterStep(TStepFail{"empty tester"}); })) {}

TesterModel TesterModel::defer(std::function<TesterStep(const GenCtx&)> thunk) {
  TesterModel t;
  t.thunk_ = std::make_shared<const std::function<TesterStep(const GenCtx&)>>(std::move(thunk));
  return t;
}

TesterStep TesterModel::step(const GenCtx& ctx) const { return (*thunk_)(ctx); }

std::optional<Packet> phys_to_model(const PhysPacket& p, const ConnMap& map) {
  std::optional<Mcid> mc = map.mcid_of(p.pcid);
  if (!mc) return std::nullopt;
  return Packet{*mc, true, to_sym(p.msg)};
}

namespace {

bool status_matches(int model_status, int observed, bool strict) {
  if (model_status == observed) return true;
  if (strict) return false;
  return model_status / 100 == 2 && observed / 100 == 2;
}

// Every header the model specifies must appear in the observation with the
// same value; extra observed headers (Date, Server, ...) are ignored.
const HeaderField* missing_header(const std::vector<HeaderField>& want,
                                  const std::vector<HeaderField>& got) {
  for (const HeaderField& w : want) {
    bool found = false;
    for (const HeaderField& g : got) {
      if (header_name_is(g.name, w.name) && g.value == w.value) {
        found = true;
        break;
      }
    }
    if (!found) return &w;
  }
  return nullptr;
}

std::string payload_mismatch(const std::string& what) { return "Unexpected payload: " + what; }

}  // namespace

std::variant<std::pair<ConstraintStore, ConnMap>, std::string> guard_packet(
    const Packet& model_pkt, const PhysPacket& observed, const ConstraintStore& store,
    const ConnMap& map, const DeriveConfig& cfg) {
  if (observed.outbound) return std::string("Unexpected payload: outbound packet in guard");

  std::optional<ConnMap> map2 = map.bind(model_pkt.conn, observed.pcid);
  if (!map2) return std::string("Unexpected connection");

  SymPayload obs = to_sym(observed.msg);

  if (const auto* want = std::get_if<SymRequest>(&model_pkt.payload)) {
    const auto* got = std::get_if<SymRequest>(&obs);
    if (got == nullptr) return payload_mismatch("expected a request");
    if (want->method != got->method)
      return payload_mismatch("method " + got->method + " != " + want->method);
    if (want->target != got->target)
      return payload_mismatch("target " + got->target + " != " + want->target);
    if (want->precond.has_value() != got->precond.has_value())
      return payload_mismatch("precondition presence differs");
    ConstraintStore store2 = store;
    if (want->precond) {
      if (want->precond->kind != got->precond->kind)
        return payload_mismatch("precondition kind differs");
      auto s = store2.assert_tag(TagExpr::literal(want->precond->tag), got->precond->tag);
      if (!s) return payload_mismatch("precondition tag differs");
      store2 = *s;
    }
    if (want->body != got->body) return payload_mismatch("body differs");
    if (const HeaderField* h = missing_header(want->extra_headers, got->extra_headers))
      return payload_mismatch("header " + h->name + " differs");
    return std::pair{std::move(store2), std::move(*map2)};
  }

  const auto& want = std::get<SymResponse>(model_pkt.payload);
  const auto* got = std::get_if<SymResponse>(&obs);
  if (got == nullptr) return payload_mismatch("expected a response");
  if (!status_matches(want.status, got->status, cfg.strict_status)) {
    std::ostringstream os;
    os << "status " << got->status << " != " << want.status;
    return payload_mismatch(os.str());
  }
  ConstraintStore store2 = store;
  if (want.etag) {
    if (!got->etag) return payload_mismatch("missing ETag header");
    auto s = store2.assert_tag(*want.etag, got->etag->literal_value());
    if (!s) return payload_mismatch("ETag incompatible with branch knowledge");
    store2 = *s;
  }
  if (want.body != got->body) return payload_mismatch("body differs");
  if (const HeaderField* h = missing_header(want.extra_headers, got->extra_headers))
    return payload_mismatch("header " + h->name + " differs");
  return std::pair{std::move(store2), std::move(*map2)};
}

TesterModel unifier(Observer o, ConnMap map, ConstraintStore vars, DeriveConfig cfg) {
  return TesterModel::defer([o = std::move(o), map = std::move(map), vars = std::move(vars),
                             cfg](const GenCtx& ctx) -> TesterStep {
    ObserverStep s = o.step();
    if (auto* fr = std::get_if<ObsFresh>(&s)) {
      auto [v, vars2] = vars.new_var(fr->kind);
      return TStepTau{unifier(fr->k(v), map, std::move(vars2), cfg)};
    }
    if (auto* un = std::get_if<ObsUnify>(&s)) {
      std::optional<ConstraintStore> vars2 = vars.assert_bool(un->cond, un->expected);
      if (!vars2) return TStepFail{"Unexpected payload: branch condition unsatisfiable"};
      return TStepTau{unifier(un->next, map, std::move(*vars2), cfg)};
    }
    if (auto* det = std::get_if<ObsDetermine>(&s)) {
      return TStepDetermine{unifier(det->first, map, vars, cfg),
                            unifier(det->second, map, vars, cfg)};
    }
    if (auto* gen = std::get_if<ObsEmitGen>(&s)) {
      const PhysPacket& pkt = *ctx.next;
      std::optional<Packet> model_pkt = phys_to_model(pkt, map);
      if (!model_pkt) return TStepFail{"Unexpected connection"};
      auto k = gen->k;
      return TStepEmit{pkt, unifier(k(*model_pkt), map, vars, cfg), vars, map};
    }
    if (auto* exp = std::get_if<ObsExpect>(&s)) {
      Packet expected = exp->expected;
      Observer next = exp->next;
      ConstraintStore vars_snapshot = vars;
      ConnMap map_snapshot = map;
      auto k = [expected, next, vars_snapshot, map_snapshot,
                cfg](const PhysPacket& p) -> TesterModel {
        return TesterModel::defer([expected, next, vars_snapshot, map_snapshot, cfg,
                                   p](const GenCtx&) -> TesterStep {
          auto r = guard_packet(expected, p, vars_snapshot, map_snapshot, cfg);
          if (auto* err = std::get_if<std::string>(&r)) return TStepFail{*err};
          auto& [vars2, map2] = std::get<0>(r);
          return TStepTau{unifier(next, map2, vars2, cfg)};
        });
      };
      return TStepExpect{std::move(k), vars, map};
    }
    if (auto* f = std::get_if<ObsFail>(&s)) return TStepFail{f->reason};
    return TStepTau{unifier(std::get<ObsTau>(s).next, map, vars, cfg)};
  });
}

TesterModel derive_tester(const Model& m, const DeriveConfig& cfg) {
  return unifier(dualize(m), ConnMap(cfg.client_conns), ConstraintStore(), cfg);
}

}  // namespace httpmbt
