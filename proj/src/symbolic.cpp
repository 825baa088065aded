#include "httpmbt/symbolic.hpp"

#include <algorithm>
#include <stdexcept>

namespace httpmbt {

TagExpr TagExpr::var(SymVar v) {
  if (v.kind != SymKind::tag) throw std::invalid_argument("TagExpr::var: boolean variable");
  return TagExpr(v);
}

BoolExpr::BoolExpr(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

BoolExpr BoolExpr::constant(bool v) { return BoolExpr(Node(Const{v})); }

static BoolExpr::Match make_match(bool strong, TagExpr a, TagExpr b) {
  if (a.is_var() && b.is_var())
    throw std::invalid_argument("match: var-vs-var comparison is not in the constraint language");
  return BoolExpr::Match{strong, std::move(a), std::move(b)};
}

BoolExpr BoolExpr::strong_match(TagExpr a, TagExpr b) {
  return BoolExpr(Node(make_match(true, std::move(a), std::move(b))));
}

BoolExpr BoolExpr::weak_match(TagExpr a, TagExpr b) {
  return BoolExpr(Node(make_match(false, std::move(a), std::move(b))));
}

BoolExpr BoolExpr::negation(BoolExpr e) { return BoolExpr(Node(Not{std::move(e)})); }

BoolExpr BoolExpr::fresh(SymVar v) {
  if (v.kind != SymKind::boolean) throw std::invalid_argument("BoolExpr::fresh: tag variable");
  return BoolExpr(Node(Fresh{v}));
}

std::pair<SymVar, ConstraintStore> ConstraintStore::new_var(SymKind kind) const {
  ConstraintStore next = *this;
  SymVar v{next.next_id_++, kind};
  if (kind == SymKind::tag) {
    next.tags_.emplace(v.id, TagKnowledge{});
  } else {
    next.bools_.emplace(v.id, std::nullopt);
  }
  return {v, std::move(next)};
}

bool ConstraintStore::knows(SymVar v) const {
  return v.kind == SymKind::tag ? tags_.count(v.id) > 0 : bools_.count(v.id) > 0;
}

const ConstraintStore::TagKnowledge* ConstraintStore::tag_knowledge(std::uint32_t id) const {
  auto it = tags_.find(id);
  return it == tags_.end() ? nullptr : &it->second;
}

std::optional<bool> ConstraintStore::bool_knowledge(std::uint32_t id) const {
  auto it = bools_.find(id);
  return it == bools_.end() ? std::nullopt : it->second;
}

namespace {

using TagKnowledge = ConstraintStore::TagKnowledge;
using Exclusion = ConstraintStore::Exclusion;
using FlagInfo = ConstraintStore::FlagInfo;

bool has_exclusion(const TagKnowledge& k, const std::string& opaque, bool strong_kind) {
  return std::binary_search(k.excluded.begin(), k.excluded.end(), Exclusion{opaque, strong_kind});
}

bool has_any_exclusion(const TagKnowledge& k, const std::string& opaque) {
  return has_exclusion(k, opaque, false) || has_exclusion(k, opaque, true);
}

void add_exclusion(TagKnowledge& k, const std::string& opaque, bool strong_kind) {
  Exclusion e{opaque, strong_kind};
  auto it = std::lower_bound(k.excluded.begin(), k.excluded.end(), e);
  if (it == k.excluded.end() || *it != e) k.excluded.insert(it, e);
}

// Installs a binding on an unbound var and folds the exclusion set into it.
// Exclusions either contradict (handled by the caller), sharpen the flag, or
// become vacuous once the opaque part is pinned.
bool bind_var(TagKnowledge& k, std::string opaque, FlagInfo flag) {
  for (const Exclusion& e : k.excluded) {
    if (e.opaque != opaque) continue;
    if (!e.strong_kind) return false;  // not_weak: opaque must differ
    // not_strong with same opaque forces a weak tag
    if (flag == FlagInfo::strong_only) return false;
    flag = FlagInfo::weak_only;
  }
  k.excluded.clear();
  k.bound = ConstraintStore::TagBinding{std::move(opaque), flag};
  return true;
}

Truth truth_of(bool b) { return b ? Truth::known_true : Truth::known_false; }

}  // namespace

Truth ConstraintStore::match_truth(const BoolExpr::Match& m) const {
  if (!m.lhs.is_var() && !m.rhs.is_var()) {
    const ETag& a = m.lhs.literal_value();
    const ETag& b = m.rhs.literal_value();
    return truth_of(m.strong ? strong_compare(a, b) : weak_compare(a, b));
  }
  const SymVar& v = m.lhs.is_var() ? m.lhs.var_value() : m.rhs.var_value();
  const ETag& lit = m.lhs.is_var() ? m.rhs.literal_value() : m.lhs.literal_value();
  const TagKnowledge* k = tag_knowledge(v.id);
  if (k == nullptr) throw std::invalid_argument("match on a variable unknown to this store");

  if (m.strong && lit.weak) return Truth::known_false;  // weak literal never matches strongly

  if (k->bound) {
    const TagBinding& b = *k->bound;
    if (!m.strong) return truth_of(b.opaque == lit.opaque);
    if (b.opaque != lit.opaque) return Truth::known_false;
    switch (b.flag) {
      case FlagInfo::strong_only: return Truth::known_true;
      case FlagInfo::weak_only: return Truth::known_false;
      case FlagInfo::either: return Truth::undetermined;
    }
  }
  if (!m.strong) {
    if (has_exclusion(*k, lit.opaque, false)) return Truth::known_false;
    return Truth::undetermined;
  }
  if (has_any_exclusion(*k, lit.opaque)) return Truth::known_false;
  return Truth::undetermined;
}

std::optional<ConstraintStore> ConstraintStore::assert_match(const BoolExpr::Match& m,
                                                             bool expected) const {
  switch (match_truth(m)) {
    case Truth::known_true: return expected ? std::optional(*this) : std::nullopt;
    case Truth::known_false: return expected ? std::nullopt : std::optional(*this);
    case Truth::undetermined: break;
  }
  // Undetermined: one operand is an insufficiently constrained var.
  const SymVar& v = m.lhs.is_var() ? m.lhs.var_value() : m.rhs.var_value();
  const ETag& lit = m.lhs.is_var() ? m.rhs.literal_value() : m.lhs.literal_value();
  ConstraintStore next = *this;
  TagKnowledge& k = next.tags_.at(v.id);

  if (k.bound) {
    // Only reachable when the opaque parts agree and the flag is open:
    // the assertion decides the weakness flag.
    k.bound->flag = (m.strong == expected) ? FlagInfo::strong_only : FlagInfo::weak_only;
    return next;
  }
  if (expected) {
    if (!bind_var(k, lit.opaque, m.strong ? FlagInfo::strong_only : FlagInfo::either))
      return std::nullopt;
    return next;
  }
  add_exclusion(k, lit.opaque, m.strong);
  return next;
}

std::optional<ConstraintStore> ConstraintStore::assert_bool(const BoolExpr& e,
                                                            bool expected) const {
  const BoolExpr::Node& n = e.node();
  if (const auto* c = std::get_if<BoolExpr::Const>(&n)) {
    return c->value == expected ? std::optional(*this) : std::nullopt;
  }
  if (const auto* m = std::get_if<BoolExpr::Match>(&n)) {
    return assert_match(*m, expected);
  }
  if (const auto* neg = std::get_if<BoolExpr::Not>(&n)) {
    return assert_bool(neg->inner, !expected);
  }
  const auto& f = std::get<BoolExpr::Fresh>(n);
  auto it = bools_.find(f.var.id);
  if (it == bools_.end()) throw std::invalid_argument("fresh() on a variable unknown to this store");
  if (it->second.has_value()) {
    return *it->second == expected ? std::optional(*this) : std::nullopt;
  }
  ConstraintStore next = *this;
  next.bools_[f.var.id] = expected;
  return next;
}

std::optional<ConstraintStore> ConstraintStore::assert_tag(const TagExpr& e,
                                                           const ETag& observed) const {
  if (!e.is_var()) {
    return e.literal_value() == observed ? std::optional(*this) : std::nullopt;
  }
  const SymVar& v = e.var_value();
  auto it = tags_.find(v.id);
  if (it == tags_.end()) throw std::invalid_argument("assert_tag on a variable unknown to this store");
  const TagKnowledge& cur = it->second;
  FlagInfo exact = observed.weak ? FlagInfo::weak_only : FlagInfo::strong_only;

  if (cur.bound) {
    if (cur.bound->opaque != observed.opaque) return std::nullopt;
    if (cur.bound->flag == FlagInfo::either) {
      ConstraintStore next = *this;
      next.tags_.at(v.id).bound->flag = exact;
      return next;
    }
    return cur.bound->flag == exact ? std::optional(*this) : std::nullopt;
  }
  ConstraintStore next = *this;
  if (!bind_var(next.tags_.at(v.id), observed.opaque, exact)) return std::nullopt;
  return next;
}

Truth ConstraintStore::eval(const BoolExpr& e) const {
  const BoolExpr::Node& n = e.node();
  if (const auto* c = std::get_if<BoolExpr::Const>(&n)) return truth_of(c->value);
  if (const auto* m = std::get_if<BoolExpr::Match>(&n)) return match_truth(*m);
  if (const auto* neg = std::get_if<BoolExpr::Not>(&n)) {
    switch (eval(neg->inner)) {
      case Truth::known_true: return Truth::known_false;
      case Truth::known_false: return Truth::known_true;
      case Truth::undetermined: return Truth::undetermined;
    }
  }
  const auto& f = std::get<BoolExpr::Fresh>(n);
  auto known = bool_knowledge(f.var.id);
  return known.has_value() ? truth_of(*known) : Truth::undetermined;
}

}  // namespace httpmbt
