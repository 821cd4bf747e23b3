#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "mclex/closure.hpp"
#include "mclex/enumeration.hpp"
#include "mclex/localization.hpp"

using namespace mclex;

namespace {

const ExtendedMatrix kMaltsev = parse_matrix("1 2 2 | 1 ; 2 2 1 | 1");
const ExtendedMatrix kUnital = parse_matrix("1 * | 1 ; * 1 | 1");
const ExtendedMatrix kSubtractive = parse_matrix("1 * | 1 ; 1 1 | *");
const ExtendedMatrix kStronglyUnital = parse_matrix("1 * * | 1 ; 2 2 1 | 1");

std::vector<ExtendedMatrix> all_matrices(Window w) {
  std::vector<ExtendedMatrix> out;
  for (std::size_t n = 1; n <= w.rows; ++n)
    for (std::size_t m = 0; m <= w.left; ++m) {
      const std::size_t cells = n * (m + 1);
      std::vector<Entry> grid(cells, 0);
      while (true) {
        out.emplace_back(n, m, w.vars, grid);
        std::size_t c = 0;
        while (c < cells && grid[c] == w.vars) grid[c++] = 0;
        if (c == cells) break;
        ++grid[c];
      }
    }
  return out;
}

std::set<std::pair<std::size_t, std::size_t>> edge_set(const std::vector<std::pair<std::size_t, std::size_t>>& e) {
  return {e.begin(), e.end()};
}

std::set<std::pair<std::size_t, std::size_t>> transitive_closure(
    std::size_t count, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<char>> reach(count, std::vector<char>(count, 0));
  for (const auto& [a, b] : edges) reach[a][b] = 1;
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t i = 0; i < count; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < count; ++j)
          if (reach[k][j]) reach[i][j] = 1;
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < count; ++j)
      if (i != j && reach[i][j]) out.emplace(i, j);
  return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mclex-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("generation of tiny windows") {
  const auto one = generate_all({1, 0, 1});
  REQUIRE(one.size() == 2);
  CHECK(one[0].to_string() == "| *");
  CHECK(one[1].to_string() == "| 1");
  for (std::size_t i = 1; i < one.size(); ++i) CHECK(canonical_compare(one[i - 1], one[i]) < 0);

  const auto cands = generate_all({3, 3, 2});
  for (std::size_t i = 1; i < cands.size(); ++i) CHECK(canonical_compare(cands[i - 1], cands[i]) < 0);
}

TEST_CASE("pad_rows keeps the class") {
  const auto padded = pad_rows(kUnital, 4);
  CHECK(padded.rows() == 4);
  CHECK(equivalent(padded, kUnital));
  CHECK(pad_rows(kUnital, 2) == kUnital);
}

TEST_CASE("clamp") {
  CHECK(clamp({2, 20, 1}).left == 2);
  CHECK(clamp({2, 3, 5}).vars == 2);
  CHECK(clamp({4, 14, 1}) == Window{4, 14, 1});
}

TEST_CASE("no variables gives a single class") {
  for (std::size_t n = 1; n <= 3; ++n)
    for (std::size_t m = 0; m <= 3; ++m) {
      const auto g = classify({n, m, 0});
      REQUIRE(g.classes.size() == 1);
      CHECK(g.classes[0].canonical == parse_matrix("| *").with_vars(0));
    }
}

TEST_CASE("size tables") {
  const std::size_t three[] = {2, 2, 8, 42};
  for (std::size_t m = 0; m < 4; ++m) CHECK(classify({3, m, 2}).classes.size() == three[m]);
  const std::size_t four[] = {2, 2, 8, 48, 156};
  for (std::size_t m = 0; m < 5; ++m) CHECK(classify({4, m, 1}).classes.size() == four[m]);
  CHECK(classify({2, 3, 2}).classes.size() == 6);
}

TEST_CASE("classes agree with brute force") {
  for (const Window w : {Window{2, 2, 1}, Window{2, 2, 2}, Window{3, 2, 1}}) {
    const auto g = classify(w);
    std::vector<ExtendedMatrix> reps;
    for (const auto& c : g.classes) reps.push_back(c.canonical);
    for (std::size_t i = 0; i < reps.size(); ++i)
      for (std::size_t j = i + 1; j < reps.size(); ++j) CHECK_FALSE(equivalent(reps[i], reps[j]));
    std::set<std::size_t> hit;
    for (const auto& m : all_matrices(w)) {
      const auto canon = canonical(m, w);
      const auto idx = g.find(canon);
      REQUIRE_MESSAGE(idx, m.to_string());
      hit.insert(*idx);
      CHECK(equivalent(canon, m));
      CHECK(canonical_compare(canon, normalize(m)) <= 0);
    }
    CHECK(hit.size() == g.classes.size());
  }
}

TEST_CASE("canonical representatives") {
  CHECK(canonical(kStronglyUnital, {2, 3, 2}) == parse_matrix("1 * * | 1 ; 2 1 2 | 1"));
  CHECK(canonical(kMaltsev, {2, 3, 2}) == parse_matrix("1 2 2 | 1 ; 2 1 2 | 1"));
  CHECK(canonical(parse_matrix("1 1 * | 1 ; * * 1 | 1 ; 1 * 1 | *"), {3, 6, 1}) ==
        parse_matrix("1 1 * | 1 ; * * 1 | 1 ; 1 * 1 | *"));
  CHECK(canonical(parse_matrix("* | 1"), {1, 1, 1}) == parse_matrix("| 1"));
  CHECK(canonical(parse_matrix("1 | 1"), {1, 1, 1}) == parse_matrix("| *").with_vars(0));
  CHECK_THROWS(canonical(kMaltsev, {1, 3, 2}));
}

TEST_CASE("two-row poset") {
  const auto g = classify({2, 3, 2});
  REQUIRE(g.classes.size() == 6);
  const auto anti = g.find(parse_matrix("| *").with_vars(0));
  const auto triv = g.find(parse_matrix("| 1"));
  const auto unital = g.find(canonical(kUnital, g.window));
  const auto sub = g.find(canonical(kSubtractive, g.window));
  const auto su = g.find(canonical(kStronglyUnital, g.window));
  const auto mal = g.find(canonical(kMaltsev, g.window));
  REQUIRE((anti && triv && unital && sub && su && mal));
  const std::set<std::pair<std::size_t, std::size_t>> expected{
      {*triv, *mal}, {*mal, *su}, {*su, *unital}, {*su, *sub}, {*unital, *anti}, {*sub, *anti}};
  CHECK(edge_set(g.reduced_edges) == expected);
  CHECK(g.classes[*unital].canonical == parse_matrix("1 * | 1 ; * 1 | 1"));
  CHECK(g.classes[*sub].canonical == parse_matrix("1 * | 1 ; 1 1 | *"));
}

TEST_CASE("edges match pairwise implication") {
  const auto g = classify({3, 3, 2});
  const auto edges = edge_set(g.edges);
  for (std::size_t i = 0; i < g.classes.size(); ++i)
    for (std::size_t j = 0; j < g.classes.size(); ++j)
      if (i != j) CHECK(edges.contains({i, j}) == implies(g.classes[i].canonical, g.classes[j].canonical));
}

TEST_CASE("Hasse diagram") {
  for (const Window w : {Window{3, 3, 2}, Window{4, 3, 1}}) {
    const auto g = classify(w);
    CHECK(transitive_closure(g.classes.size(), g.reduced_edges) == edge_set(g.edges));
    for (std::size_t r = 0; r < g.reduced_edges.size(); ++r) {
      auto rest = g.reduced_edges;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(r));
      CHECK_FALSE(transitive_closure(g.classes.size(), rest).contains(g.reduced_edges[r]));
    }
  }
  CHECK(edge_set(transitive_reduction(3, {{0, 1}, {1, 2}, {0, 2}})) ==
        std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}});
}

TEST_CASE("window monotonicity") {
  const auto small = classify({3, 2, 2});
  const auto big = classify({3, 3, 2});
  std::vector<std::size_t> image;
  for (const auto& c : small.classes) {
    const auto idx = big.find(canonical(c.canonical, big.window));
    REQUIRE(idx);
    image.push_back(*idx);
  }
  const auto big_edges = edge_set(big.edges);
  for (const auto& [a, b] : small.edges) CHECK(big_edges.contains({image[a], image[b]}));
  for (const auto& c : big.classes) CHECK(canonical(c.canonical, big.window) == c.canonical);
}

TEST_CASE("workers do not change the result") {
  ClassifyOptions opts;
  opts.workers = 3;
  CHECK(to_json(classify({3, 3, 2}, opts)) == to_json(classify({3, 3, 2})));
}

TEST_CASE("checkpoint resume and corruption") {
  const auto dir = scratch_dir("checkpoint");
  ClassifyOptions opts;
  opts.checkpoint_dir = dir;
  const auto first = to_json(classify({3, 3, 2}, opts));
  std::vector<std::string> notes;
  opts.progress = [&](std::string_view s) { notes.emplace_back(s); };
  CHECK(to_json(classify({3, 3, 2}, opts)) == first);
  CHECK(std::any_of(notes.begin(), notes.end(), [](const std::string& s) { return s.starts_with("resumed"); }));

  opts.progress = nullptr;
  CHECK_THROWS_AS(classify({3, 2, 2}, opts), CheckpointError);

  std::filesystem::path file;
  for (const auto& e : std::filesystem::directory_iterator(dir)) file = e.path();
  REQUIRE(!file.empty());
  std::string text;
  {
    std::ifstream in(file);
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  const auto pos = text.find("\"members\":");
  REQUIRE(pos != std::string::npos);
  text[pos + 10] = text[pos + 10] == '9' ? '8' : '9';
  std::ofstream(file) << text;
  CHECK_THROWS_AS(classify({3, 3, 2}, opts), CheckpointError);
  std::ofstream(file) << "{ not json";
  CHECK_THROWS_AS(classify({3, 3, 2}, opts), CheckpointError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("json round trip and dot") {
  const auto g = classify({2, 3, 2});
  const auto text = to_json(g);
  const auto back = poset_from_json(text);
  CHECK(to_json(back) == text);
  CHECK(back.classes.size() == 6);
  CHECK(back.groups.size() == g.groups.size());
  CHECK_THROWS(poset_from_json("{}"));
  CHECK_THROWS(poset_from_json(R"({"params":{"n":1,"m":0,"k":0},"classes":[],"edges":[[0,1]],"reducedEdges":[],"groups":[]})"));

  const auto dot = to_dot(g);
  std::size_t nodes = 0;
  for (std::size_t pos = 0; (pos = dot.find("[label=", pos)) != std::string::npos; ++pos) ++nodes;
  CHECK(nodes == 6);
  CHECK(dot.find("cluster_") != std::string::npos);
  CHECK(dot.find("Mal'tsev") != std::string::npos);
}

TEST_CASE("localization groups") {
  const auto g = classify({2, 3, 2});
  for (const auto& grp : g.groups)
    for (std::size_t i : grp.classes)
      for (std::size_t j : grp.classes) CHECK(loc_equal(g.classes[i].canonical, g.classes[j].canonical));
  for (std::size_t a = 0; a < g.groups.size(); ++a)
    for (std::size_t b = a + 1; b < g.groups.size(); ++b)
      CHECK_FALSE(loc_equal(g.classes[g.groups[a].classes.front()].canonical,
                            g.classes[g.groups[b].classes.front()].canonical));
  const auto mal = subposet_by_localization(g, kMaltsev);
  CHECK(mal.classes.size() == 4);
  REQUIRE(mal.groups.size() == 1);
  CHECK(mal.groups[0].label == "Mal'tsev");
  REQUIRE(mal.groups[0].bottom);
  CHECK(mal.classes[*mal.groups[0].bottom].canonical == canonical(kMaltsev, g.window));
  CHECK_THROWS(subposet_by_localization(g, kUnital));
}

TEST_CASE("Mal'tsev group bottom in the three-row window") {
  const auto g = classify({3, 4, 2});
  CHECK(g.classes.size() == 217);
  const auto mal = subposet_by_localization(g, kMaltsev);
  REQUIRE(mal.groups.size() == 1);
  REQUIRE(mal.groups[0].bottom);
  CHECK(equivalent(mal.classes[*mal.groups[0].bottom].canonical, kMaltsev));
}

TEST_CASE("adjunction-based loc_equal agrees with equal localizations") {
  const auto cands = generate_all({2, 3, 2});
  std::vector<ExtendedMatrix> proper;
  for (const auto& c : cands)
    if (degeneracy_class(c) == Degeneracy::kProper) proper.push_back(c);
  for (std::size_t i = 0; i < proper.size(); i += 7)
    for (std::size_t j = 0; j < proper.size(); j += 5)
      CHECK(loc_equal(proper[i], proper[j]) == equivalent(localize(proper[i]), localize(proper[j])));
}
