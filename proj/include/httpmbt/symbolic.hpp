#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "httpmbt/etag.hpp"

namespace httpmbt {

enum class SymKind { tag, boolean };

struct SymVar {
  std::uint32_t id = 0;
  SymKind kind = SymKind::tag;

  friend bool operator==(const SymVar&, const SymVar&) = default;
  friend auto operator<=>(const SymVar&, const SymVar&) = default;
};

// Symbolic ETag expression: either a concrete tag or a variable standing for
// a tag the server generated internally.
class TagExpr {
 public:
  static TagExpr literal(ETag t) { return TagExpr(std::move(t)); }
  static TagExpr var(SymVar v);

  bool is_var() const { return std::holds_alternative<SymVar>(v_); }
  const ETag& literal_value() const { return std::get<ETag>(v_); }
  const SymVar& var_value() const { return std::get<SymVar>(v_); }

  friend bool operator==(const TagExpr&, const TagExpr&) = default;

 private:
  explicit TagExpr(ETag t) : v_(std::move(t)) {}
  explicit TagExpr(SymVar v) : v_(v) {}
  std::variant<ETag, SymVar> v_;
};

// Symbolic boolean expression over tag matches and free boolean variables.
// Match nodes admit at most one variable operand; var-vs-var matches are
// rejected at construction time.
class BoolExpr {
 public:
  struct Const {
    bool value;
  };
  struct Match {
    bool strong;  // strong vs weak comparison
    TagExpr lhs;
    TagExpr rhs;
  };
  struct Not;  // defined below; holds the negated expression
  struct Fresh {
    SymVar var;  // unconstrained boolean variable (the `or` sugar)
  };
  using Node = std::variant<Const, Match, Not, Fresh>;

  static BoolExpr constant(bool v);
  static BoolExpr strong_match(TagExpr a, TagExpr b);
  static BoolExpr weak_match(TagExpr a, TagExpr b);
  static BoolExpr negation(BoolExpr e);
  static BoolExpr fresh(SymVar v);

  const Node& node() const;

 private:
  explicit BoolExpr(Node n);
  std::shared_ptr<const Node> node_;
};

struct BoolExpr::Not {
  BoolExpr inner;
};

inline const BoolExpr::Node& BoolExpr::node() const { return *node_; }

enum class Truth { known_true, known_false, undetermined };

// Per-branch knowledge about symbolic variables. Stores are immutable
// values: every assertion returns a new store.
class ConstraintStore {
 public:
  enum class FlagInfo { strong_only, weak_only, either };

  struct TagBinding {
    std::string opaque;
    FlagInfo flag = FlagInfo::either;

    friend bool operator==(const TagBinding&, const TagBinding&) = default;
  };

  // A recorded non-match: `not_weak` excludes any tag with this opaque part,
  // `not_strong` excludes only the strong tag with this opaque part.
  struct Exclusion {
    std::string opaque;
    bool strong_kind = false;  // true: not_strong; false: not_weak

    friend bool operator==(const Exclusion&, const Exclusion&) = default;
    friend auto operator<=>(const Exclusion&, const Exclusion&) = default;
  };

  struct TagKnowledge {
    std::optional<TagBinding> bound;
    std::vector<Exclusion> excluded;  // kept sorted; empty once bound

    friend bool operator==(const TagKnowledge&, const TagKnowledge&) = default;
  };

  ConstraintStore() = default;

  std::pair<SymVar, ConstraintStore> new_var(SymKind kind) const;

  // Satisfiability-checking assertions. nullopt means the assertion is
  // incompatible with the recorded knowledge ("Unexpected payload").
  std::optional<ConstraintStore> assert_bool(const BoolExpr& e, bool expected) const;
  std::optional<ConstraintStore> assert_tag(const TagExpr& e, const ETag& observed) const;

  // Known(b) iff every assignment consistent with this store evaluates e to b.
  Truth eval(const BoolExpr& e) const;

  bool knows(SymVar v) const;
  const TagKnowledge* tag_knowledge(std::uint32_t id) const;
  std::optional<bool> bool_knowledge(std::uint32_t id) const;
  std::size_t size() const { return tags_.size() + bools_.size(); }

  friend bool operator==(const ConstraintStore&, const ConstraintStore&) = default;

 private:
  Truth match_truth(const BoolExpr::Match& m) const;
  std::optional<ConstraintStore> assert_match(const BoolExpr::Match& m, bool expected) const;

  std::uint32_t next_id_ = 0;
  std::map<std::uint32_t, TagKnowledge> tags_;
  std::map<std::uint32_t, std::optional<bool>> bools_;
};

}  // namespace httpmbt
