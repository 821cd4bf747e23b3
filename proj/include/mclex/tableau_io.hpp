#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mclex/closure.hpp"

namespace mclex {

/// Matrix text that pins the variable budget with a "#nmk" header when it
/// exceeds the largest variable used.
std::string matrix_text(const ExtendedMatrix& m);

/// Tableau JSON: {goal, hypotheses, steps:[{added, witnesses:[{matrix, row,
/// map}], consumed}], verdict}. Entries are "*" or variable indices. A
/// single proof is written as an object, several as an array.
std::string tableau_to_json(std::span<const TableauProof> proofs);

/// Reads either form written by tableau_to_json. Throws
/// std::invalid_argument on malformed input.
std::vector<TableauProof> tableau_from_json(std::string_view text);

}  // namespace mclex
