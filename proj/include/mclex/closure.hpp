#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mclex/matrix.hpp"

namespace mclex {

using ColumnCode = std::uint32_t;

/// The set {∗, x_1, ..., x_k}^n of n-tuples ("columns"), numbered in base
/// k+1 with coordinate 0 as the least significant digit. The all-∗ column
/// is code 0.
class ColumnUniverse {
 public:
  static constexpr ColumnCode kStarColumn = 0;
  static constexpr std::size_t kMaxSize = std::size_t{1} << 24;

  ColumnUniverse(std::size_t arity, unsigned vars);

  std::size_t arity() const noexcept { return arity_; }
  unsigned vars() const noexcept { return vars_; }
  unsigned base() const noexcept { return vars_ + 1; }
  std::size_t size() const noexcept { return weights_.back(); }
  /// base^d; weight(arity()) == size().
  ColumnCode weight(std::size_t d) const noexcept { return static_cast<ColumnCode>(weights_[d]); }

  ColumnCode encode(std::span<const Entry> column) const;
  std::vector<Entry> decode(ColumnCode code) const;

  friend bool operator==(const ColumnUniverse& a, const ColumnUniverse& b) {
    return a.arity_ == b.arity_ && a.vars_ == b.vars_;
  }

 private:
  std::size_t arity_;
  unsigned vars_;
  std::vector<std::size_t> weights_;
};

/// Bitset over a column universe; a pointed relation on {∗, x_1, ..., x_k}.
class ColumnSet {
 public:
  ColumnSet() = default;
  explicit ColumnSet(std::size_t universe_size)
      : size_(universe_size), words_((universe_size + 63) / 64, 0) {}

  std::size_t universe_size() const noexcept { return size_; }
  bool contains(ColumnCode c) const noexcept { return (words_[c >> 6] >> (c & 63)) & 1u; }
  /// Returns true when `c` was not yet present.
  bool insert(ColumnCode c) noexcept {
    std::uint64_t& w = words_[c >> 6];
    const std::uint64_t bit = std::uint64_t{1} << (c & 63);
    const bool fresh = !(w & bit);
    w |= bit;
    return fresh;
  }
  std::size_t count() const noexcept;
  bool is_subset_of(const ColumnSet& other) const noexcept;
  std::vector<ColumnCode> members() const;

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  friend bool operator==(const ColumnSet&, const ColumnSet&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// The pointed relation made of the left columns of `n` and the all-∗
/// column. The universe arity must equal n.rows() and its alphabet must
/// cover n's variables.
ColumnSet col_star(const ExtendedMatrix& n, const ColumnUniverse& u);

/// A row of a hypothesis matrix after applying a pointed map
/// {∗, x_1, ..., x_{k_M}} -> {∗, x_1, ..., x_k}.
struct InstantiatedRow {
  std::size_t matrix = 0;
  std::size_t row = 0;
  /// Images of x_1, ..., x_{k_M}; ∗ always maps to ∗.
  std::vector<Entry> map;
  /// map applied to the row: m_M left entries followed by the right entry.
  std::vector<Entry> tuple;
};

/// For every matrix of `hypotheses`, all instantiations of its rows into
/// the alphabet with `target_vars` variables, rows outermost and maps in
/// odometer order (image of x_1 varying fastest). With `dedup`, only the
/// first instantiation producing each tuple is kept.
std::vector<std::vector<InstantiatedRow>> build_instantiated_rows(
    std::span<const ExtendedMatrix> hypotheses, unsigned target_vars, bool dedup = true);

struct Witness {
  std::size_t matrix = 0;
  std::size_t row = 0;
  std::vector<Entry> map;

  friend bool operator==(const Witness&, const Witness&) = default;
};

/// One line of a lex∗-tableau: the column added to the relation together
/// with the per-coordinate instantiated rows that produced it and the left
/// columns they required. The initial all-∗ step has no witnesses.
struct TableauStep {
  std::vector<Entry> added;
  std::vector<Witness> witnesses;
  std::vector<std::vector<Entry>> consumed;

  friend bool operator==(const TableauStep&, const TableauStep&) = default;
};

struct TableauProof {
  ExtendedMatrix goal;
  std::vector<ExtendedMatrix> hypotheses;
  std::vector<TableauStep> steps;
  bool verdict = false;

  friend bool operator==(const TableauProof&, const TableauProof&) = default;
};

/// Saturation of a pointed relation under the row-wise interpretations of
/// a finite matrix set, for a fixed arity and alphabet.
class ClosureEngine {
 public:
  ClosureEngine(std::span<const ExtendedMatrix> hypotheses, const ColumnUniverse& universe);

  const ColumnUniverse& universe() const noexcept { return universe_; }
  std::span<const ExtendedMatrix> hypotheses() const noexcept { return hypotheses_; }

  /// Grows `set` to the least fixpoint of R -> S(R). Additions are applied
  /// in rounds (the chain R ⊂ S(R) ⊂ SS(R) ...); within a round matrices are
  /// visited in order and instantiated-row tuples in odometer order. When
  /// `goal` is given the computation stops as soon as it is present. When
  /// `log` is given every addition is appended with its first witness.
  /// With `allowed`, only columns of that set are ever added.
  void close(ColumnSet& set, std::optional<ColumnCode> goal = std::nullopt,
             std::vector<TableauStep>* log = nullptr, const ColumnSet* allowed = nullptr) const;

  /// Columns of S(R) that are not in R, in discovery order.
  std::vector<ColumnCode> one_step(const ColumnSet& set) const;

 private:
  struct Compiled {
    std::size_t width = 0;             // m_M + 1
    std::vector<Entry> tuples;         // count × width
    std::vector<std::size_t> source;   // index into rows_[matrix]
  };

  struct Found {
    ColumnCode code;
    std::size_t matrix;
    std::vector<std::size_t> choice;
  };

  void round(const ColumnSet& set, std::optional<ColumnCode> goal, std::vector<Found>& found,
             bool want_witness, const ColumnSet* allowed) const;

  std::vector<ExtendedMatrix> hypotheses_;
  ColumnUniverse universe_;
  std::vector<std::vector<InstantiatedRow>> rows_;
  std::vector<Compiled> compiled_;
};

struct ClosureResult {
  ColumnSet columns;
  std::vector<TableauStep> steps;
};

/// Least S-sharp pointed relation containing `seed` (which must contain the
/// all-∗ column).
ClosureResult closure(std::span<const ExtendedMatrix> hypotheses, const ColumnUniverse& universe,
                      const ColumnSet& seed, bool record);

/// col∗_S(N): the closure of col∗(N) over N's own alphabet.
ColumnSet closed_columns(std::span<const ExtendedMatrix> hypotheses, const ExtendedMatrix& goal);

struct Decision {
  bool verdict = false;
  /// One certificate per goal when positive (empty when a hypothesis is
  /// trivial); the failing goal's saturation log when negative. Positive
  /// certificates are irredundant: dropping any intermediate column makes
  /// the goal underivable.
  std::vector<TableauProof> proofs;
};

/// Decides whether the conjunction of `hypotheses` implies every matrix of
/// `goals` (inclusion of matrix classes).
Decision decide(std::span<const ExtendedMatrix> hypotheses, std::span<const ExtendedMatrix> goals,
                bool with_proofs = true);

/// decide() without certificates.
bool implies(std::span<const ExtendedMatrix> hypotheses, std::span<const ExtendedMatrix> goals);
bool implies(const ExtendedMatrix& hypothesis, const ExtendedMatrix& goal);

/// Mutual implication of two single matrices.
bool equivalent(const ExtendedMatrix& a, const ExtendedMatrix& b);

struct TableauCheck {
  bool ok = false;
  /// Index of the first offending step (steps.size() when the goal is not
  /// reached or the negative verdict is not a fixpoint).
  std::optional<std::size_t> failed_step;
  std::string message;
};

/// Independent replay of a certificate.
TableauCheck check_tableau(const TableauProof& proof);

/// Horn-clause form of the row-wise interpretations of one matrix for a
/// fixed arity and alphabet: each rule says "these columns present implies
/// that column present". Only subset-minimal premises are kept, and the
/// all-∗ column is left out of premises since every pointed relation
/// contains it.
class CompiledTheory {
 public:
  CompiledTheory(const ExtendedMatrix& hypothesis, const ColumnUniverse& universe);

  const ColumnUniverse& universe() const noexcept { return universe_; }
  bool trivial() const noexcept { return trivial_; }
  std::size_t rule_count() const noexcept { return conclusion_.size(); }

  /// Closes `set` in place; stops once `goal` is present.
  void close(ColumnSet& set, std::optional<ColumnCode> goal = std::nullopt) const;

  /// Whether the hypothesis implies `goal`; goal.rows() must equal the
  /// arity and goal.max_var() must fit in the alphabet.
  bool implies(const ExtendedMatrix& goal) const;

 private:
  ColumnUniverse universe_;
  bool trivial_ = false;
  std::size_t words_ = 1;
  std::vector<ColumnCode> conclusion_;
  std::vector<std::uint64_t> premise_;  // rule_count × words_
};

}  // namespace mclex
