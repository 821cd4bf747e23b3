#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "mclex/closure.hpp"
#include "mclex/degeneracy.hpp"
#include "mclex/oracle.hpp"

using namespace mclex;
using namespace mclex::oracle;

namespace {

const ExtendedMatrix kStronglyUnital = parse_matrix("1 * * | 1 ; 2 2 1 | 1");
const ExtendedMatrix kSwapped = parse_matrix("2 2 1 | 1 ; 1 * * | 1");
const ConcreteRelation kExample = ConcreteRelation::on({2}, 2, {{1, 0}, {1, 1}});

std::vector<ExtendedMatrix> corpus(std::size_t max_rows, std::size_t max_left, unsigned max_vars) {
  std::vector<ExtendedMatrix> out;
  for (std::size_t n = 1; n <= max_rows; ++n)
    for (std::size_t m = 0; m <= max_left; ++m)
      for (unsigned k = 0; k <= max_vars; ++k) {
        const std::size_t cells = n * (m + 1);
        std::vector<Entry> grid(cells, 0);
        while (true) {
          ExtendedMatrix mat(n, m, k, grid);
          if (mat.max_var() == k) out.push_back(mat);
          std::size_t c = 0;
          while (c < cells && grid[c] == k) grid[c++] = 0;
          if (c == cells) break;
          ++grid[c];
        }
      }
  return out;
}

}  // namespace

TEST_CASE("the sharpness example") {
  CHECK(strictly_closed(kExample, kStronglyUnital));
  CHECK(closed(kExample, kSwapped));
  const auto ce = strict_counterexample(kExample, kSwapped);
  REQUIRE(ce);
  CHECK(std::set<Tuple>(ce->left_columns.begin(), ce->left_columns.end()) ==
        std::set<Tuple>{{1, 1}, {1, 0}, {0, 0}});
  CHECK(ce->right_column == Tuple{0, 1});
  CHECK_FALSE(sharp(kExample, kStronglyUnital));
}

TEST_CASE("closedness basics") {
  const auto full = ConcreteRelation::on({3}, 2, {{0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}, {2, 0}, {2, 1}, {2, 2}});
  for (const char* text : {"1 2 2 | 1 ; 2 2 1 | 1", "1 * | 1 ; * 1 | 1", "1 * | 1 ; 1 1 | *"}) {
    const auto m = parse_matrix(text);
    CHECK(closed(full, m));
    CHECK(sharp(full, m));
  }
  const auto anti = parse_matrix("1 2 | 2 ; 2 1 | 1");
  for (const auto& r : all_relations({2}, 2)) CHECK(strictly_closed(r, anti));
  CHECK_THROWS(strictly_closed(kExample, parse_matrix("1 | 1")));
}

TEST_CASE("strict implies closed, sharp implies strict") {
  const auto ms = corpus(2, 2, 1);
  const auto rels = all_relations({2}, 2);
  for (const auto& m : ms) {
    if (m.rows() != 2) continue;
    for (const auto& r : rels) {
      if (strictly_closed(r, m)) CHECK(closed(r, m));
      if (sharp(r, m)) CHECK(strictly_closed(r, m));
    }
  }
}

TEST_CASE("functionality") {
  CHECK(is_functional(parse_matrix("| 1"), {1}));
  CHECK_FALSE(is_functional(parse_matrix("| 1"), {2}));
  CHECK_FALSE(is_functional(parse_matrix("* | 1"), {2}));
  CHECK(is_functional(parse_matrix("1 2 2 | 1 ; 2 2 1 | 1"), {2}));
}

TEST_CASE("pointed sets and anti-triviality") {
  CHECK(set_star_has_closed_relations(parse_matrix("| *")));
  CHECK(set_star_has_closed_relations(parse_matrix("1 | 1")));
  CHECK_FALSE(set_star_has_closed_relations(parse_matrix("1 2 2 | 1 ; 2 2 1 | 1")));
}

TEST_CASE("forbidden reductions") {
  CHECK(has_forbidden_reduction(parse_matrix("* | 1")));
  CHECK(has_forbidden_reduction(parse_matrix("| 1")));
  CHECK(has_forbidden_reduction(parse_matrix("1 | 1 ; 1 | *")));
  CHECK_FALSE(has_forbidden_reduction(parse_matrix("1 * | 1 ; * 1 | 1")));
}

TEST_CASE("reflection matches the closure engine") {
  const auto n3 = parse_matrix("1 1 * | 1 ; * * 1 | 1 ; 1 * 1 | *");
  const auto reflected = reflect(left_column_relation(n3), std::span(&kStronglyUnital, 1));
  CHECK(reflected.contains({1, 1, 0}));
  CHECK(reflect(left_column_relation(n3), {}) == left_column_relation(n3));

  const auto ms = corpus(2, 2, 1);
  for (const auto& goal : ms) {
    const ColumnUniverse u(goal.rows(), goal.vars());
    for (const auto& h : ms) {
      const auto engine = closed_columns(std::span(&h, 1), goal);
      const auto naive = reflect(left_column_relation(goal), std::span(&h, 1));
      std::set<Tuple> from_engine;
      for (auto code : engine.members()) {
        const auto col = u.decode(code);
        from_engine.insert(Tuple(col.begin(), col.end()));
      }
      CHECK_MESSAGE(from_engine == naive.tuples(), h.to_string() << " over " << goal.to_string());
    }
  }
}

TEST_CASE("triviality characterizations agree on small matrices") {
  const auto report = run_battery(2, 3, 2, 300);
  CHECK(report.disagreements == 0);
  for (const auto& f : report.failures) MESSAGE(f);
}

TEST_CASE("positive decisions are sound on finite relations") {
  const auto ms = corpus(2, 2, 1);
  std::vector<std::vector<ConcreteRelation>> rels(3);
  rels[1] = all_relations({3}, 1);
  for (const auto& r : all_relations({3}, 2)) rels[2].push_back(r);
  for (const auto& r : all_relations({2}, 2)) rels[2].push_back(r);
  std::size_t checked = 0;
  for (std::size_t a = 0; a < ms.size(); a += 3)
    for (std::size_t b = 0; b < ms.size(); b += 5) {
      if (is_trivial(ms[a]) || !implies(ms[a], ms[b])) continue;
      for (const auto& r : rels[ms[b].rows()]) {
        if (!sharp(r, ms[a])) continue;
        ++checked;
        CHECK_MESSAGE(closed(r, ms[b]), ms[a].to_string() << " => " << ms[b].to_string());
      }
    }
  CHECK(checked > 0);
}
