#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "mclex/matrix.hpp"

namespace mclex {

/// Partition of the left-column indices {0, ..., m-1}, stored as a block id
/// per index. Block ids are the smallest member of each block.
struct ColumnPartition {
  std::vector<std::size_t> block;

  bool related(std::size_t j, std::size_t jj) const { return block[j] == block[jj]; }
};

/// j ~ j' iff row i has equal left entries at j and j'.
ColumnPartition row_kernel(const ExtendedMatrix& m, std::size_t i);

/// j ~ j' iff j = j' or both columns carry a ∗ in row i or row i'.
ColumnPartition star_pair_relation(const ExtendedMatrix& m, std::size_t i, std::size_t ii);

/// Join of the two row kernels and the star-pair relation for rows (i, i').
ColumnPartition join_partition(const ExtendedMatrix& m, std::size_t i, std::size_t ii);

/// True when the class of `m` only holds categories equivalent to the
/// one-morphism category, i.e. when one of the three combinatorial
/// conditions on right entries fails.
bool is_trivial(const ExtendedMatrix& m);

/// True when every finitely complete pointed category satisfies `m`: the
/// right column is all ∗ or repeats a left column.
bool is_anti_trivial(const ExtendedMatrix& m);

enum class Degeneracy { kTrivial, kAntiTrivial, kProper };

Degeneracy degeneracy_class(const ExtendedMatrix& m);

std::string_view to_string(Degeneracy d);

}  // namespace mclex
