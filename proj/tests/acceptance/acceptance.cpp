#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "mclex/closure.hpp"
#include "mclex/degeneracy.hpp"
#include "mclex/enumeration.hpp"
#include "mclex/localization.hpp"
#include "mclex/oracle.hpp"

using namespace mclex;

namespace {

const ExtendedMatrix kMaltsev = parse_matrix("1 2 2 | 1 ; 2 2 1 | 1");
const ExtendedMatrix kStronglyUnital = parse_matrix("1 * * | 1 ; 2 2 1 | 1");
const ExtendedMatrix kStronglyUnital3 = parse_matrix("1 1 * | 1 ; * * 1 | 1 ; 1 * 1 | *");
const ExtendedMatrix kUnital = parse_matrix("1 * | 1 ; * 1 | 1");
const ExtendedMatrix kSubtractive = parse_matrix("1 * | 1 ; 1 1 | *");
const ExtendedMatrix kNormalProjections = parse_matrix("1 1 * | 1 ; 1 * 1 | * ; 1 * * | 1");
const ExtendedMatrix kMajority = parse_matrix("2 1 1 | 1 ; 1 2 1 | 1 ; 1 1 2 | 1");
const ExtendedMatrix kArithmetical = parse_matrix("1 2 2 | 1 ; 2 2 1 | 1 ; 1 2 1 | 1");
const ExtendedMatrix kMinority = parse_matrix("1 2 2 | 1 ; 2 1 2 | 1 ; 2 2 1 | 1");

bool slow_enabled() {
  const char* v = std::getenv("MCLEX_SLOW");
  return v && std::string(v) == "1";
}

/// Collects the findings of one criterion.
class Report {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return failures_.empty(); }
  bool skipped() const { return checks_ == 0; }
  std::string text() const {
    std::string out;
    for (const auto& n : notes_) out += (out.empty() ? "" : "; ") + n;
    for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + std::string("mismatch: ") + f;
    return out;
  }

 private:
  std::vector<std::string> notes_, failures_;
  std::size_t checks_ = 0;
};

std::map<std::tuple<std::size_t, std::size_t, unsigned>, PosetGraph> cache;

const PosetGraph& poset(Window w) {
  const auto key = std::make_tuple(w.rows, w.left, w.vars);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, classify(w)).first;
  return it->second;
}

std::size_t class_count(Window w) {
  ClassifyOptions opts;
  opts.with_order = false;
  opts.with_groups = false;
  const auto key = std::make_tuple(w.rows, w.left, w.vars);
  if (auto it = cache.find(key); it != cache.end()) return it->second.classes.size();
  return classify(w, opts).classes.size();
}

std::string window_name(Window w) {
  return "(" + std::to_string(w.rows) + "," + std::to_string(w.left) + "," + std::to_string(w.vars) + ")";
}

void size_table(Report& r, std::size_t rows, unsigned vars, const std::vector<std::size_t>& expected,
                std::size_t fast_up_to, const std::set<std::size_t>& full_graph) {
  const bool slow = slow_enabled();
  std::string got;
  for (std::size_t m = 0; m < expected.size(); ++m) {
    if (m > fast_up_to && !slow) break;
    const Window w{rows, m, vars};
    const std::size_t count = full_graph.contains(m) ? poset(w).classes.size() : class_count(w);
    got += (got.empty() ? "" : " ") + std::to_string(count);
    r.check(count == expected[m], window_name(w) + " has " + std::to_string(count) + ", expected " +
                                      std::to_string(expected[m]));
  }
  r.note("counts m=0.. " + got);
  if (!slow && fast_up_to + 1 < expected.size())
    r.note("m>" + std::to_string(fast_up_to) + " needs MCLEX_SLOW=1");
}

void criterion_sizes_3m2(Report& r) {
  size_table(r, 3, 2, {2, 2, 8, 42, 217, 1137, 5100}, 4, {5, 6});
}

void criterion_sizes_4m1(Report& r) {
  size_table(r, 4, 1, {2, 2, 8, 48, 156, 453, 1066, 1953, 2841, 3502, 3822, 3957, 4007, 4023, 4027}, 5, {14});
  if (!slow_enabled()) return;
  const auto& g14 = poset({4, 14, 1});
  ClassifyOptions opts;
  opts.with_order = false;
  opts.with_groups = false;
  const auto g15 = classify({4, 15, 1}, opts);
  bool same = g14.classes.size() == g15.classes.size();
  for (std::size_t i = 0; same && i < g14.classes.size(); ++i)
    same = g14.classes[i].canonical == g15.classes[i].canonical;
  r.check(same, "(4,15,1) differs from (4,14,1)");
  r.note("(4,15,1) = (4,14,1): " + std::to_string(g15.classes.size()));
}

bool is_left_permutation(const ExtendedMatrix& a, const ExtendedMatrix& b) {
  if (a.rows() != b.rows() || a.left_cols() != b.left_cols() || a.right_column() != b.right_column())
    return false;
  std::multiset<std::vector<Entry>> ca, cb;
  for (std::size_t j = 0; j < a.left_cols(); ++j) ca.insert(a.column(j)), cb.insert(b.column(j));
  return ca == cb;
}

void criterion_two_row_poset(Report& r) {
  const auto& g = poset({2, 3, 2});
  r.check(g.classes.size() == 6, "class count " + std::to_string(g.classes.size()));
  const std::vector<std::pair<std::string, ExtendedMatrix>> examples{
      {"anti-trivial", parse_matrix("| *")}, {"trivial", parse_matrix("| 1")},
      {"unital", kUnital},                   {"subtractive", kSubtractive},
      {"Mal'tsev", kMaltsev},                {"strongly unital", kStronglyUnital}};
  std::map<std::string, std::size_t> id;
  std::size_t literal = 0, permuted = 0;
  for (const auto& [name, m] : examples) {
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < g.classes.size() && !hit; ++i) {
      const auto& c = g.classes[i].canonical;
      if (c.to_string() == m.to_string()) {
        hit = i;
        ++literal;
      } else if (is_left_permutation(c, m) && equivalent(c, m)) {
        hit = i;
        ++permuted;
      }
    }
    r.check(hit.has_value(), name + " form not among the canonical matrices");
    if (hit) {
      r.check(equivalent(g.classes[*hit].canonical, m), name + " class mismatch");
      id[name] = *hit;
    }
  }
  r.note(std::to_string(literal) + " forms literal, " + std::to_string(permuted) + " up to left-column order");
  if (id.size() != examples.size()) return;
  const std::set<std::pair<std::size_t, std::size_t>> expected{
      {id["trivial"], id["Mal'tsev"]},     {id["Mal'tsev"], id["strongly unital"]},
      {id["strongly unital"], id["unital"]}, {id["strongly unital"], id["subtractive"]},
      {id["unital"], id["anti-trivial"]},  {id["subtractive"], id["anti-trivial"]}};
  const std::set<std::pair<std::size_t, std::size_t>> got(g.reduced_edges.begin(), g.reduced_edges.end());
  r.check(got == expected, "reduced edges differ from bottom->Mal'tsev->SU->{Sub,U}->top");
  r.note(std::to_string(got.size()) + " reduced edges");
}

void criterion_known_implications(Report& r) {
  const std::vector<ExtendedMatrix> pair{kUnital, kSubtractive};
  const std::vector<ExtendedMatrix> su{kStronglyUnital};
  r.check(implies(su, pair) && implies(pair, su), "strongly unital vs {unital, subtractive}");
  r.check(equivalent(kStronglyUnital, kStronglyUnital3), "the two strongly unital matrices");
  r.check(equivalent(kNormalProjections, kSubtractive), "normal projections vs subtractive");
  r.check(implies(kMaltsev, kStronglyUnital), "Mal'tsev => strongly unital");
  r.check(implies(kArithmetical, kMinority), "arithmetical => minority");
  r.check(!implies(kStronglyUnital, kMaltsev), "strongly unital =/=> Mal'tsev");
  r.note("6 decisions, one a negative control");
}

void criterion_subposets(Report& r) {
  if (!slow_enabled()) {
    r.note("needs MCLEX_SLOW=1");
    return;
  }
  const std::vector<std::tuple<Window, std::string, ExtendedMatrix, std::size_t>> cases{
      {{3, 5, 2}, "Mal'tsev", kMaltsev, 268},        {{3, 6, 2}, "arithmetical", kArithmetical, 123},
      {{3, 6, 2}, "majority", kMajority, 89},        {{4, 14, 1}, "majority", kMajority, 3},
      {{3, 6, 2}, "minority", kMinority, 12},        {{4, 14, 1}, "minority", kMinority, 1},
      {{4, 14, 1}, "arithmetical", kArithmetical, 4}};
  for (const auto& [w, name, anchor, expected] : cases) {
    const auto sub = subposet_by_localization(poset(w), anchor);
    r.check(sub.classes.size() == expected, name + " in " + window_name(w) + " has " +
                                                 std::to_string(sub.classes.size()));
    r.note(name + window_name(w) + "=" + std::to_string(sub.classes.size()));
  }
}

void criterion_group_count(Report& r) {
  const auto& g = poset({3, 6, 1});
  r.check(g.groups.size() == 13, "group count " + std::to_string(g.groups.size()));
  r.note(std::to_string(g.classes.size()) + " classes in " + std::to_string(g.groups.size()) + " groups");
}

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

void criterion_oracle(Report& r) {
  std::size_t checked = 0, disagree = 0;
  std::set<std::string> seen;
  for (const auto& m : corpus(3, 3, 2)) {
    const ExtendedMatrix norm = normalize(m);
    if (!seen.insert(norm.to_string()).second) continue;
    ++checked;
    const bool t = is_trivial(norm);
    if (t != !oracle::is_functional(norm, {2}) || t != oracle::has_forbidden_reduction(norm)) ++disagree;
  }
  r.check(disagree == 0, std::to_string(disagree) + " triviality disagreements");
  r.note(std::to_string(checked) + " normalized matrices for triviality");

  const auto small = corpus(2, 2, 1);
  std::size_t pairs = 0, differ = 0;
  for (const auto& goal : small) {
    const ColumnUniverse u(goal.rows(), goal.vars());
    for (const auto& h : small) {
      ++pairs;
      const auto engine = closed_columns(std::span(&h, 1), goal);
      const auto naive = oracle::reflect(oracle::left_column_relation(goal), std::span(&h, 1));
      std::set<oracle::Tuple> from_engine;
      for (auto code : engine.members()) {
        const auto col = u.decode(code);
        from_engine.insert(oracle::Tuple(col.begin(), col.end()));
      }
      if (from_engine != naive.tuples()) ++differ;
    }
  }
  r.check(differ == 0, std::to_string(differ) + " reflection mismatches");
  r.note(std::to_string(pairs) + " reflection pairs");

  const auto rel = oracle::ConcreteRelation::on({2}, 2, {{1, 0}, {1, 1}});
  const auto swapped = parse_matrix("2 2 1 | 1 ; 1 * * | 1");
  r.check(oracle::strictly_closed(rel, kStronglyUnital), "R strictly M-closed");
  r.check(oracle::closed(rel, swapped), "R M21-closed");
  r.check(!oracle::strictly_closed(rel, swapped), "R not strictly M21-closed");
  r.check(!oracle::sharp(rel, kStronglyUnital), "R not M-sharp");
  r.note("four example verdicts");
}

std::set<std::vector<Entry>> added_columns(const TableauProof& p) {
  std::set<std::vector<Entry>> out;
  for (const auto& s : p.steps) out.insert(s.added);
  return out;
}

void criterion_tableau(Report& r) {
  const std::vector<ExtendedMatrix> two{kStronglyUnital}, three{kStronglyUnital3};
  const Decision fwd = decide(two, three);
  const Decision back = decide(three, two);
  r.check(fwd.verdict && back.verdict, "verdicts");
  if (fwd.proofs.size() != 1 || back.proofs.size() != 1) {
    r.check(false, "expected one certificate per direction");
    return;
  }
  r.check(check_tableau(fwd.proofs[0]).ok, "forward certificate rejected");
  r.check(check_tableau(back.proofs[0]).ok, "reverse certificate rejected");
  const std::set<std::vector<Entry>> expected{{kStar, kStar, kStar}, {kStar, kStar, 1}, {1, 1, kStar}};
  r.check(added_columns(fwd.proofs[0]) == expected, "forward added columns");
  r.check(fwd.proofs[0].steps.size() == expected.size(), "forward step count");
  r.note("forward " + std::to_string(fwd.proofs[0].steps.size()) + " steps, reverse " +
         std::to_string(back.proofs[0].steps.size()) + " steps");
}

void criterion_saturation(Report& r) {
  if (!slow_enabled()) {
    r.note("needs MCLEX_SLOW=1");
    return;
  }
  const auto& base = poset({2, 3, 2});
  ClassifyOptions opts;
  opts.with_order = false;
  opts.with_groups = false;
  for (const Window w : {Window{2, 14, 3}, Window{2, 10, 4}}) {
    const auto g = classify(w, opts);
    std::set<std::size_t> image;
    for (const auto& c : base.classes)
      if (auto idx = g.find(canonical(c.canonical, w))) image.insert(*idx);
    const bool same = g.classes.size() == base.classes.size() && image.size() == base.classes.size();
    r.check(same, window_name(w) + " has " + std::to_string(g.classes.size()) + " classes");
    r.note(window_name(w) + "=" + std::to_string(g.classes.size()));
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Report&)>>> criteria{
      {"size table 3xmx2", criterion_sizes_3m2},
      {"size table 4xmx1", criterion_sizes_4m1},
      {"two-row poset", criterion_two_row_poset},
      {"known equivalences and implications", criterion_known_implications},
      {"localization subposet counts", criterion_subposets},
      {"localization group count of (3,6,1)", criterion_group_count},
      {"oracle equivalence suite", criterion_oracle},
      {"tableau fidelity", criterion_tableau},
      {"two-row saturation", criterion_saturation},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Report r;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(r);
    } catch (const std::exception& e) {
      r.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line.precision(1);
    line << std::fixed << (!r.ok() ? "FAIL" : r.skipped() ? "SKIP" : "PASS") << " [" << i + 1 << "] " << criteria[i].first << " ("
         << secs << " s): " << r.text();
    std::cout << line.str() << std::endl;
    if (!r.ok()) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
