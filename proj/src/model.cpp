#include "httpmbt/model.hpp"

namespace httpmbt {

Model::Model()
    : thunk_(std::make_shared<const std::function<ModelStep()>>(
          [] { return ModelStep(StepFail{"empty model"}); })) {}

Model Model::defer(std::function<ModelStep()> thunk) {
  Model m;
  m.thunk_ = std::make_shared<const std::function<ModelStep()>>(std::move(thunk));
  return m;
}

ModelStep Model::step() const { return (*thunk_)(); }

Model recv_then(RecvCont k) {
  return Model::defer([k = std::move(k)] { return ModelStep(StepRecv{k}); });
}

Model send_then(Packet pkt, Model next) {
  return Model::defer(
      [pkt = std::move(pkt), next = std::move(next)] { return ModelStep(StepSend{pkt, next}); });
}

Model branch(BoolExpr cond, Model on_true, Model on_false) {
  return Model::defer([cond = std::move(cond), on_true = std::move(on_true),
                       on_false = std::move(on_false)] {
    return ModelStep(StepBranch{cond, on_true, on_false});
  });
}

Model fresh_then(SymKind kind, SymCont k) {
  return Model::defer([kind, k = std::move(k)] { return ModelStep(StepFresh{kind, k}); });
}

Model fail(std::string reason) {
  return Model::defer([reason = std::move(reason)] { return ModelStep(StepFail{reason}); });
}

Model tau(std::function<Model()> next) {
  return Model::defer([next = std::move(next)] { return ModelStep(StepTau{next()}); });
}

Model or_model(Model a, Model b) {
  return fresh_then(SymKind::boolean, [a = std::move(a), b = std::move(b)](SymVar v) {
    return branch(BoolExpr::fresh(v), a, b);
  });
}

ModelStep step_visible(const Model& m, int tau_bound) {
  ModelStep s = m.step();
  while (std::holds_alternative<StepTau>(s)) {
    if (--tau_bound <= 0) return ModelStep(StepFail{"unproductive model"});
    s = std::get<StepTau>(s).next.step();
  }
  return s;
}

}  // namespace httpmbt
