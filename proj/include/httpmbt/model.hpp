#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>

#include "httpmbt/message.hpp"
#include "httpmbt/symbolic.hpp"

namespace httpmbt {

class Model;

using RecvCont = std::function<Model(const Packet&)>;
using SymCont = std::function<Model(SymVar)>;

struct ModelStep;

// A resumable model program: an immutable value whose next visible action is
// computed on demand. Continuations are pure, so models can be duplicated
// and advanced independently for branch exploration; stepping the same model
// twice yields structurally identical steps.
class Model {
 public:
  Model();  // a failed model ("empty")
  static Model defer(std::function<ModelStep()> thunk);

  ModelStep step() const;

 private:
  std::shared_ptr<const std::function<ModelStep()>> thunk_;
};

struct StepRecv {
  RecvCont k;
};
struct StepSend {
  Packet pkt;
  Model next;
};
struct StepBranch {
  BoolExpr cond;
  Model on_true;
  Model on_false;
};
struct StepFresh {
  SymKind kind;
  SymCont k;
};
struct StepFail {
  std::string reason;
};
struct StepTau {
  Model next;  // silent internal step
};

struct ModelStep : std::variant<StepRecv, StepSend, StepBranch, StepFresh, StepFail, StepTau> {
  using variant::variant;
};

// Basic constructors.
Model recv_then(RecvCont k);
Model send_then(Packet pkt, Model next);
Model branch(BoolExpr cond, Model on_true, Model on_false);
Model fresh_then(SymKind kind, SymCont k);
Model fail(std::string reason);
Model tau(std::function<Model()> next);

// Nondeterministic choice: unfolds to a fresh boolean followed by a branch
// on it.
Model or_model(Model a, Model b);

inline constexpr int kDefaultTauBound = 10'000;

// Drives through silent steps until a visible one; exceeding the bound
// yields StepFail("unproductive model").
ModelStep step_visible(const Model& m, int tau_bound = kDefaultTauBound);

}  // namespace httpmbt
