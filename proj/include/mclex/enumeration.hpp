#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mclex/degeneracy.hpp"
#include "mclex/matrix.hpp"

namespace mclex {

/// Dimension bounds (n, m, k) of Mclex∗[n,m,k]: at most `rows` rows, `left`
/// left columns and `vars` variables.
struct Window {
  std::size_t rows = 1;
  std::size_t left = 0;
  unsigned vars = 0;

  friend bool operator==(const Window&, const Window&) = default;
};

/// Applies the dimension caps that leave the class set unchanged:
/// m <= (k+1)^n - 2 when k > 0 and k <= m - 1 when m > 1.
Window clamp(Window w);

/// Calls `emit` for every matrix of the window meeting the canonical-form
/// constraints (right column x_1...x_1 ∗...∗, sorted distinct left columns
/// each holding a variable, sorted distinct rows within each right-entry
/// block, first-occurrence variable order per row). Matrices come in
/// canonical order: rows, left columns, variables, then LexKey. With
/// `caps`, the window is clamped and each shape uses at most m'-1
/// variables when m' > 1.
void generate(Window w, const std::function<void(const ExtendedMatrix&)>& emit, bool caps = true);
std::vector<ExtendedMatrix> generate_all(Window w, bool caps = true);

/// Repeats the last row until the matrix has `rows` rows; the class is
/// unchanged.
ExtendedMatrix pad_rows(const ExtendedMatrix& m, std::size_t rows);

struct PosetClass {
  ExtendedMatrix canonical;
  std::size_t members = 0;
  Degeneracy kind = Degeneracy::kProper;
};

struct LocGroup {
  std::string label;
  std::vector<std::size_t> classes;
  /// Member class contained in all others, when there is one.
  std::optional<std::size_t> bottom;
};

/// Mclex∗[n,m,k]: classes in canonical order of their representatives,
/// inclusion edges (a, b) meaning class a ⊆ class b with a != b, the
/// transitive reduction, and localization groups.
struct PosetGraph {
  Window window;
  std::vector<PosetClass> classes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::pair<std::size_t, std::size_t>> reduced_edges;
  std::vector<LocGroup> groups;

  std::optional<std::size_t> find(const ExtendedMatrix& canonical) const;
};

struct ClassifyOptions {
  unsigned workers = 1;
  bool with_order = true;
  bool with_groups = true;
  /// Directory for resumable state; classification restarts from the last
  /// completed candidate block found there.
  std::optional<std::filesystem::path> checkpoint_dir;
  std::function<void(std::string_view)> progress;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PosetGraph classify(Window w, const ClassifyOptions& options = {});

/// Reduced edge list of the partial order on `count` nodes given by `edges`.
std::vector<std::pair<std::size_t, std::size_t>> transitive_reduction(
    std::size_t count, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// Restriction of `g` to the classes whose localization equals that of the
/// ∗-free `anchor`, with edges and groups recomputed.
PosetGraph subposet_by_localization(const PosetGraph& g, const ExtendedMatrix& anchor);

/// The (n,m,k)-canonical representative of m's class; `m` must fit the
/// window.
ExtendedMatrix canonical(const ExtendedMatrix& m, Window w);

std::string to_json(const PosetGraph& g);
PosetGraph poset_from_json(std::string_view text);
std::string to_dot(const PosetGraph& g);

}  // namespace mclex
