#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mclex/matrix.hpp"

namespace mclex {

struct AdmissibleWitness {
  unsigned variable = 0;
  /// 0-based left column carrying `variable` in every row that mentions it.
  std::size_t column = 0;
};

/// Whether `variable` appears anywhere in `m`.
bool uses_variable(const ExtendedMatrix& m, unsigned variable);

/// M[x -> ∗]: every occurrence of `variable` replaced by ∗. `m` must be
/// ∗-free; an unused variable leaves the matrix unchanged.
ExtendedMatrix substitute_star(const ExtendedMatrix& m, unsigned variable);

/// First left column equal to `variable` in every row mentioning it, if
/// any. `m` must be ∗-free.
std::optional<AdmissibleWitness> is_admissible(const ExtendedMatrix& m, unsigned variable);

/// N_loc: a left column of ∗'s is prepended, then every ∗ becomes the fresh
/// variable x_{k+1}. The result is ∗-free with k+1 variables.
ExtendedMatrix localize(const ExtendedMatrix& n);

/// Whether Loc(a) ⊆ Loc(b), decided as the pointed implication N_loc(a) ⇒ b
/// through the adjunction between restriction and localization.
bool loc_included(const ExtendedMatrix& a, const ExtendedMatrix& b);

/// Whether the two pointed classes have the same Bourn localization.
bool loc_equal(const ExtendedMatrix& a, const ExtendedMatrix& b);

/// Index of the member of a localization group whose class is contained in
/// every other member's class, when one exists. Throws std::invalid_argument
/// on an empty or incoherent group.
std::optional<std::size_t> loc_bottom(std::span<const ExtendedMatrix> group);

struct LocAnchor {
  std::string label;
  ExtendedMatrix matrix;
};

/// Non-pointed anchors naming the common localization of a group: Mal'tsev,
/// majority, arithmetical and minority.
const std::vector<LocAnchor>& loc_anchors();

/// Label for the localization of `m`: "trivial", "anti-trivial", an anchor
/// name, or the normalized N_loc.
std::string loc_label(const ExtendedMatrix& m);

}  // namespace mclex
