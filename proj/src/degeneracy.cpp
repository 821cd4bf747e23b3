#include "mclex/degeneracy.hpp"

#include <algorithm>
#include <numeric>

namespace mclex {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

  ColumnPartition partition() {
    ColumnPartition p;
    p.block.resize(parent_.size());
    for (std::size_t j = 0; j < parent_.size(); ++j) p.block[j] = find(j);
    return p;
  }

 private:
  std::vector<std::size_t> parent_;
};

void add_kernel(UnionFind& uf, const ExtendedMatrix& m, std::size_t i) {
  const std::size_t left = m.left_cols();
  for (std::size_t j = 0; j < left; ++j)
    for (std::size_t jj = j + 1; jj < left; ++jj)
      if (m.at(i, j) == m.at(i, jj)) uf.unite(j, jj);
}

void add_star_pair(UnionFind& uf, const ExtendedMatrix& m, std::size_t i, std::size_t ii) {
  std::optional<std::size_t> first;
  for (std::size_t j = 0; j < m.left_cols(); ++j) {
    if (!is_star(m.at(i, j)) && !is_star(m.at(ii, j))) continue;
    if (first) uf.unite(*first, j);
    else first = j;
  }
}

}  // namespace

ColumnPartition row_kernel(const ExtendedMatrix& m, std::size_t i) {
  UnionFind uf(m.left_cols());
  add_kernel(uf, m, i);
  return uf.partition();
}

ColumnPartition star_pair_relation(const ExtendedMatrix& m, std::size_t i, std::size_t ii) {
  UnionFind uf(m.left_cols());
  add_star_pair(uf, m, i, ii);
  return uf.partition();
}

ColumnPartition join_partition(const ExtendedMatrix& m, std::size_t i, std::size_t ii) {
  UnionFind uf(m.left_cols());
  add_kernel(uf, m, i);
  add_kernel(uf, m, ii);
  add_star_pair(uf, m, i, ii);
  return uf.partition();
}

bool is_trivial(const ExtendedMatrix& m) {
  const std::size_t n = m.rows(), left = m.left_cols();

  // A variable right entry must reappear among the left entries of its row.
  for (std::size_t i = 0; i < n; ++i) {
    const Entry r = m.right(i);
    if (is_star(r)) continue;
    bool found = false;
    for (std::size_t j = 0; j < left && !found; ++j) found = m.at(i, j) == r;
    if (!found) return true;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const Entry ri = m.right(i);
    if (is_star(ri)) continue;
    for (std::size_t ii = 0; ii < n; ++ii) {
      if (ii == i) continue;
      const Entry rii = m.right(ii);
      const ColumnPartition join = join_partition(m, i, ii);
      for (std::size_t j = 0; j < left; ++j) {
        if (m.at(i, j) != ri) continue;
        if (!is_star(rii)) {
          for (std::size_t jj = 0; jj < left; ++jj)
            if (m.at(ii, jj) == rii && !join.related(j, jj)) return true;
        } else {
          bool reaches_star = false;
          for (std::size_t jj = 0; jj < left && !reaches_star; ++jj)
            reaches_star = join.related(j, jj) && (is_star(m.at(i, jj)) || is_star(m.at(ii, jj)));
          if (!reaches_star) return true;
        }
      }
    }
  }
  return false;
}

bool is_anti_trivial(const ExtendedMatrix& m) {
  const auto right = m.right_column();
  if (std::all_of(right.begin(), right.end(), is_star)) return true;
  for (std::size_t j = 0; j < m.left_cols(); ++j)
    if (m.column(j) == right) return true;
  return false;
}

Degeneracy degeneracy_class(const ExtendedMatrix& m) {
  if (is_trivial(m)) return Degeneracy::kTrivial;
  if (is_anti_trivial(m)) return Degeneracy::kAntiTrivial;
  return Degeneracy::kProper;
}

std::string_view to_string(Degeneracy d) {
  switch (d) {
    case Degeneracy::kTrivial: return "trivial";
    case Degeneracy::kAntiTrivial: return "anti-trivial";
    case Degeneracy::kProper: return "proper";
  }
  return "proper";
}

}  // namespace mclex
