#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mclex/matrix.hpp"

/// Brute-force semantics on small finite pointed sets. Every check here is
/// exhaustive and independent of the closure engine.
namespace mclex::oracle {

inline constexpr unsigned kMaxCarrier = 4;
inline constexpr std::size_t kMaxArity = 4;

/// Elements 0..size-1; element 0 is the base point.
struct PointedSet {
  unsigned size = 1;

  friend bool operator==(const PointedSet&, const PointedSet&) = default;
};

using Tuple = std::vector<unsigned>;

/// A pointed relation R ⊆ C_1 × ... × C_n; always holds the base-point tuple.
class ConcreteRelation {
 public:
  explicit ConcreteRelation(std::vector<PointedSet> carriers);
  ConcreteRelation(std::vector<PointedSet> carriers, const std::vector<Tuple>& tuples);

  /// n-ary relation on a single carrier.
  static ConcreteRelation on(PointedSet carrier, std::size_t arity, const std::vector<Tuple>& tuples);

  std::size_t arity() const noexcept { return carriers_.size(); }
  const std::vector<PointedSet>& carriers() const noexcept { return carriers_; }
  bool single_carrier() const noexcept;
  bool contains(const Tuple& t) const { return tuples_.contains(t); }
  bool insert(const Tuple& t);
  const std::set<Tuple>& tuples() const noexcept { return tuples_; }

  friend bool operator==(const ConcreteRelation&, const ConcreteRelation&) = default;

 private:
  std::vector<PointedSet> carriers_;
  std::set<Tuple> tuples_;
};

/// Per-row pointed maps f_i : {∗, x_1, ..., x_k} -> C_i and the grid they
/// produce, with the right column last.
struct RowInterpretation {
  std::vector<std::vector<unsigned>> maps;
  std::vector<Tuple> left_columns;
  Tuple right_column;
};

/// First row-wise interpretation of `m` whose left columns lie in `r` but
/// whose right column does not.
std::optional<RowInterpretation> strict_counterexample(const ConcreteRelation& r,
                                                       const ExtendedMatrix& m);

bool strictly_closed(const ConcreteRelation& r, const ExtendedMatrix& m);

/// Same quantification restricted to interpretations with f_1 = ... = f_n;
/// `r` must be a relation on one carrier.
bool closed(const ConcreteRelation& r, const ExtendedMatrix& m);

/// Strict closedness under every matrix whose rows are a selection (with
/// repetition, in any order) of arity(r) rows of `m`.
bool sharp(const ConcreteRelation& r, const ExtendedMatrix& m);

/// Whether left agreement of two row interpretations into `y` forces
/// agreement of their right entries.
bool is_functional(const ExtendedMatrix& m, PointedSet y);

/// Whether pointed sets have M-closed relations, tested on the relation of
/// m's left columns and the base point over {∗, x_1, ..., x_k}.
bool set_star_has_closed_relations(const ExtendedMatrix& m);

/// The smallest relation containing `r` that is M-sharp for every M in
/// `hypotheses`, by naive fixpoint iteration. `r` must live on a single
/// carrier.
ConcreteRelation reflect(const ConcreteRelation& r, std::span<const ExtendedMatrix> hypotheses);

/// Whether some reduction of `m` to one or two rows over {∗, a} is one of
/// the four minimal trivial shapes.
bool has_forbidden_reduction(const ExtendedMatrix& m);

/// All pointed relations of the given arity on a carrier (2^(s^n - 1) of
/// them); intended for s^n <= 16.
std::vector<ConcreteRelation> all_relations(PointedSet carrier, std::size_t arity);

/// The relation of m's left columns plus the base point, over the free
/// pointed set on m.vars() variables (variable x_i is element i).
ConcreteRelation left_column_relation(const ExtendedMatrix& m);

struct BatteryReport {
  std::size_t matrices = 0;
  std::size_t disagreements = 0;
  std::vector<std::string> failures;
};

/// Cross-checks triviality and anti-triviality characterizations over all
/// matrices up to the given shape, plus `random_samples` random matrices
/// with up to four rows, four left columns and three variables.
BatteryReport run_battery(std::size_t max_rows, std::size_t max_left, unsigned max_vars,
                          std::size_t random_samples, unsigned seed = 1);

}  // namespace mclex::oracle
