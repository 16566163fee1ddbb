#pragma once

// Propositional Markov random fields: variables, hard clauses and weighted
// soft clauses, plus the line-oriented text format used by the CLI.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pmrf {

/// A variable index (1-based) with a sign.
class Literal {
 public:
  constexpr Literal(int var, bool positive) : var_(var), positive_(positive) {}

  /// From a signed DIMACS-style integer; 0 is not a literal.
  static constexpr Literal from_int(int lit) { return Literal(lit < 0 ? -lit : lit, lit > 0); }

  constexpr int var() const { return var_; }
  constexpr bool positive() const { return positive_; }
  constexpr Literal negated() const { return Literal(var_, !positive_); }
  constexpr int to_int() const { return positive_ ? var_ : -var_; }

  /// Ordered by variable, positive before negative.
  friend constexpr auto operator<=>(const Literal& a, const Literal& b) {
    if (auto c = a.var_ <=> b.var_; c != 0) return c;
    return b.positive_ <=> a.positive_;
  }
  friend constexpr bool operator==(const Literal&, const Literal&) = default;

 private:
  int var_;
  bool positive_;
};

/// A disjunction of literals over distinct variables, kept sorted.
class Clause {
 public:
  Clause() = default;

  /// Sorts and drops repeated literals. Throws std::invalid_argument if a
  /// literal and its complement both appear.
  explicit Clause(std::vector<Literal> literals);
  Clause(std::initializer_list<int> dimacs);

  std::span<const Literal> literals() const { return literals_; }
  std::size_t size() const { return literals_.size(); }
  bool empty() const { return literals_.empty(); }
  const Literal& operator[](std::size_t i) const { return literals_[i]; }
  auto begin() const { return literals_.begin(); }
  auto end() const { return literals_.end(); }

  bool contains(Literal lit) const;
  /// True if every literal of this clause also appears in `other`.
  bool subset_of(const Clause& other) const;
  int max_var() const { return literals_.empty() ? 0 : literals_.back().var(); }

  friend auto operator<=>(const Clause&, const Clause&) = default;
  friend bool operator==(const Clause&, const Clause&) = default;

 private:
  std::vector<Literal> literals_;
};

struct SoftClause {
  Clause clause;
  double weight = 0.0;  // natural-log potential: exp(weight) when satisfied, 1 otherwise

  friend bool operator==(const SoftClause&, const SoftClause&) = default;
};

enum class TruthValue : std::uint8_t { Unassigned, True, False };

/// Partial truth assignment over variables 1..n.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(int num_vars) : values_(static_cast<std::size_t>(num_vars) + 1, TruthValue::Unassigned) {}

  int num_vars() const { return static_cast<int>(values_.size()) - 1; }
  TruthValue value(int var) const { return values_[static_cast<std::size_t>(var)]; }
  bool is_assigned(int var) const { return value(var) != TruthValue::Unassigned; }
  bool is_true(int var) const { return value(var) == TruthValue::True; }
  void set(int var, bool v) { values_[static_cast<std::size_t>(var)] = v ? TruthValue::True : TruthValue::False; }
  void set(Literal lit) { set(lit.var(), lit.positive()); }
  void unset(int var) { values_[static_cast<std::size_t>(var)] = TruthValue::Unassigned; }

  TruthValue value(Literal lit) const {
    TruthValue v = value(lit.var());
    if (v == TruthValue::Unassigned || lit.positive()) return v;
    return v == TruthValue::True ? TruthValue::False : TruthValue::True;
  }
  bool is_total() const;
  int count_assigned() const;

  /// Total assignment from the low `num_vars` bits of `bits`; bit j-1 is X_j.
  static Assignment from_bits(int num_vars, std::uint64_t bits);

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::vector<TruthValue> values_;
};

enum class ClauseStatus { Satisfied, Falsified, Undetermined };

ClauseStatus clause_status(const Clause& c, const Assignment& a);

/// The model (X, C, R): immutable once built.
class PropMRF {
 public:
  PropMRF() = default;
  /// Throws std::out_of_range if a clause mentions a variable outside 1..num_vars,
  /// std::invalid_argument if a soft weight is not finite.
  PropMRF(int num_vars, std::vector<Clause> hard, std::vector<SoftClause> soft);

  int num_vars() const { return num_vars_; }
  const std::vector<Clause>& hard() const { return hard_; }
  const std::vector<SoftClause>& soft() const { return soft_; }
  std::size_t num_clauses() const { return hard_.size() + soft_.size(); }

  friend bool operator==(const PropMRF&, const PropMRF&) = default;

 private:
  int num_vars_ = 0;
  std::vector<Clause> hard_;
  std::vector<SoftClause> soft_;
};

/// Hard = m.hard ++ query; soft unchanged. Throws std::out_of_range on bad indices.
PropMRF conjoin_query(const PropMRF& m, std::span<const Clause> query);

PropMRF parse_model(std::istream& in);
PropMRF parse_model(const std::string& text);
void write_model(std::ostream& out, const PropMRF& m);
std::string to_string(const PropMRF& m);

/// Query files: zero or more `<lit>... 0` lines. `num_vars` bounds the indices.
std::vector<Clause> parse_query(std::istream& in, int num_vars);
std::vector<Clause> parse_query(const std::string& text, int num_vars);

/// FNV-1a hash of the serialized model, as 16 hex digits.
std::string fingerprint(const PropMRF& m);

}  // namespace pmrf
