#include "mclex/localization.hpp"

#include <algorithm>
#include <stdexcept>

#include "mclex/closure.hpp"
#include "mclex/degeneracy.hpp"

namespace mclex {

namespace {

void require_star_free(const ExtendedMatrix& m) {
  if (!m.is_star_free()) throw std::invalid_argument("matrix must not contain ∗");
}

}  // namespace

bool uses_variable(const ExtendedMatrix& m, unsigned variable) {
  return std::find(m.grid().begin(), m.grid().end(), variable) != m.grid().end();
}

ExtendedMatrix substitute_star(const ExtendedMatrix& m, unsigned variable) {
  require_star_free(m);
  std::vector<Entry> grid = m.grid();
  std::replace(grid.begin(), grid.end(), static_cast<Entry>(variable), kStar);
  return ExtendedMatrix(m.rows(), m.left_cols(), m.vars(), std::move(grid));
}

std::optional<AdmissibleWitness> is_admissible(const ExtendedMatrix& m, unsigned variable) {
  require_star_free(m);
  const auto x = static_cast<Entry>(variable);
  for (std::size_t j = 0; j < m.left_cols(); ++j) {
    bool ok = true;
    for (std::size_t i = 0; i < m.rows() && ok; ++i) {
      const auto row = m.row(i);
      if (std::find(row.begin(), row.end(), x) != row.end()) ok = m.at(i, j) == x;
    }
    if (ok) return AdmissibleWitness{variable, j};
  }
  return std::nullopt;
}

ExtendedMatrix localize(const ExtendedMatrix& n) {
  const unsigned k = n.vars() + 1;
  if (k > kMaxVariable) throw std::invalid_argument("localize: too many variables");
  const auto fresh = static_cast<Entry>(k);
  std::vector<Entry> grid;
  grid.reserve(n.rows() * (n.width() + 1));
  for (std::size_t i = 0; i < n.rows(); ++i) {
    grid.push_back(fresh);
    for (Entry e : n.row(i)) grid.push_back(is_star(e) ? fresh : e);
  }
  return ExtendedMatrix(n.rows(), n.left_cols() + 1, k, std::move(grid));
}

bool loc_included(const ExtendedMatrix& a, const ExtendedMatrix& b) {
  return implies(localize(a), b);
}

bool loc_equal(const ExtendedMatrix& a, const ExtendedMatrix& b) {
  const bool ta = is_trivial(a), tb = is_trivial(b);
  if (ta || tb) return ta && tb;
  return loc_included(a, b) && loc_included(b, a);
}

std::optional<std::size_t> loc_bottom(std::span<const ExtendedMatrix> group) {
  if (group.empty()) throw std::invalid_argument("loc_bottom: empty group");
  for (std::size_t i = 1; i < group.size(); ++i)
    if (!loc_equal(group[0], group[i]))
      throw std::invalid_argument("loc_bottom: members have different localizations");
  for (std::size_t c = 0; c < group.size(); ++c) {
    bool below_all = true;
    for (std::size_t o = 0; o < group.size() && below_all; ++o)
      if (o != c) below_all = implies(group[c], group[o]);
    if (below_all) return c;
  }
  return std::nullopt;
}

const std::vector<LocAnchor>& loc_anchors() {
  static const std::vector<LocAnchor> anchors{
      {"Mal'tsev", parse_matrix("1 2 2 | 1 ; 2 2 1 | 1")},
      {"majority", parse_matrix("2 1 1 | 1 ; 1 2 1 | 1 ; 1 1 2 | 1")},
      {"arithmetical", parse_matrix("1 2 2 | 1 ; 2 2 1 | 1 ; 1 2 1 | 1")},
      {"minority", parse_matrix("1 2 2 | 1 ; 2 1 2 | 1 ; 2 2 1 | 1")},
  };
  return anchors;
}

std::string loc_label(const ExtendedMatrix& m) {
  if (is_trivial(m)) return "trivial";
  if (is_anti_trivial(m)) return "anti-trivial";
  for (const auto& anchor : loc_anchors())
    if (loc_equal(m, anchor.matrix)) return anchor.label;
  return normalize(localize(m)).to_string();
}

}  // namespace mclex
