#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mclex {

/// A matrix entry: 0 is the constant symbol ∗, a positive value i is the
/// variable x_i.
using Entry = std::uint8_t;

inline constexpr Entry kStar = 0;

/// Largest variable index accepted anywhere in the library.
inline constexpr unsigned kMaxVariable = 64;

constexpr bool is_star(Entry e) noexcept { return e == kStar; }

/// Position of an entry in the order x_1 < x_2 < ... < x_k < ∗.
constexpr unsigned entry_rank(Entry e) noexcept {
  return e == kStar ? 0x100u : static_cast<unsigned>(e);
}

/// Renders an entry the way the matrix text format writes it.
std::string entry_to_string(Entry e);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// An n×(m+1) grid over {∗, x_1, ..., x_k}. The first m columns form the
/// left part, the last one is the right column.
class ExtendedMatrix {
 public:
  /// Builds a matrix from a row-major grid of rows × (left_cols + 1)
  /// entries. Throws std::invalid_argument on shape or variable-budget
  /// violations.
  ExtendedMatrix(std::size_t rows, std::size_t left_cols, unsigned vars,
                 std::vector<Entry> grid);

  /// Builds a matrix from explicit rows; every row must have the same
  /// length (at least one, the right entry). The variable budget defaults
  /// to the largest index used.
  static ExtendedMatrix from_rows(const std::vector<std::vector<Entry>>& rows,
                                  std::optional<unsigned> vars = std::nullopt);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t left_cols() const noexcept { return left_; }
  std::size_t width() const noexcept { return left_ + 1; }
  unsigned vars() const noexcept { return vars_; }

  /// Entry at row i, column j; j == left_cols() addresses the right column.
  Entry at(std::size_t i, std::size_t j) const noexcept {
    return grid_[i * (left_ + 1) + j];
  }
  Entry right(std::size_t i) const noexcept { return at(i, left_); }

  std::span<const Entry> row(std::size_t i) const noexcept {
    return {grid_.data() + i * (left_ + 1), left_ + 1};
  }
  std::vector<Entry> column(std::size_t j) const;
  std::vector<Entry> right_column() const { return column(left_); }
  const std::vector<Entry>& grid() const noexcept { return grid_; }

  /// Largest variable index actually used (0 when the matrix is all ∗).
  unsigned max_var() const noexcept;
  bool is_star_free() const noexcept;

  /// Same entries, different variable budget; `vars` must be >= max_var().
  ExtendedMatrix with_vars(unsigned vars) const;

  /// Matrix text format, e.g. "1 2 2 | 1 ; 2 2 1 | 1".
  std::string to_string() const;

  friend bool operator==(const ExtendedMatrix&, const ExtendedMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t left_;
  unsigned vars_;
  std::vector<Entry> grid_;
};

/// Parses the matrix text format:
///   ENTRY := '*' | DIGITS ; ROW := ENTRY* '|' ENTRY ;
///   MATRIX := ROW ((';' | NEWLINE) ROW)*
/// with an optional leading header line "#nmk n m k" pinning the dimensions
/// and the variable budget.
ExtendedMatrix parse_matrix(std::string_view text);

/// Column-major reading used to order matrices of equal shape: the right
/// column first, then the left columns from left to right, each read top to
/// bottom, under x_1 < ... < x_k < ∗.
struct LexKey {
  std::size_t rows = 0;
  std::size_t left_cols = 0;
  std::vector<unsigned> sequence;

  friend auto operator<=>(const LexKey&, const LexKey&) = default;
};

LexKey lex_key(const ExtendedMatrix& m);

/// Total order used to pick canonical representatives: fewer rows, then
/// fewer left columns, then fewer variables, then LexKey.
std::strong_ordering canonical_compare(const ExtendedMatrix& a,
                                       const ExtendedMatrix& b);

/// Rewrites a matrix into a representative of the same matrix class using
/// only the syntactic invariances: duplicate rows and left columns, all-∗
/// left columns, per-row variable renaming (first occurrence scanning the
/// right entry first) and row/column order. Idempotent. The variable
/// budget of the result is the number of variables it uses.
ExtendedMatrix normalize(const ExtendedMatrix& m);

/// Renames the variables of each row in first-occurrence order, scanning
/// the right entry first and then the left entries from left to right.
ExtendedMatrix rename_rows(const ExtendedMatrix& m);

/// The term equations p(x_{i1},...,x_{im}) = x_{i,m+1}, joined by " ; ".
std::string maltsev_condition(const ExtendedMatrix& m);

/// Multi-line grid rendering used by DOT labels and CLI output.
std::string to_grid(const ExtendedMatrix& m);

}  // namespace mclex
