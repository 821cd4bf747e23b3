#include "mclex/closure.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>
#include <stdexcept>

#include "mclex/degeneracy.hpp"

namespace mclex {

namespace {

using Words = std::vector<std::uint64_t>;

void set_bit(Words& w, std::size_t i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
bool test_bit(const Words& w, std::size_t i) { return (w[i >> 6] >> (i & 63)) & 1u; }

std::vector<Entry> apply_map(std::span<const Entry> row, std::span<const Entry> map) {
  std::vector<Entry> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = is_star(row[j]) ? kStar : map[row[j] - 1];
  return out;
}

// Advances an odometer over {0..top}^size with digit 0 fastest.
bool next_map(std::vector<Entry>& map, unsigned top) {
  for (auto& d : map) {
    if (d < top) {
      ++d;
      return true;
    }
    d = 0;
  }
  return false;
}

}  // namespace

ColumnUniverse::ColumnUniverse(std::size_t arity, unsigned vars) : arity_(arity), vars_(vars) {
  if (vars > kMaxVariable) throw std::invalid_argument("column universe: too many variables");
  weights_.reserve(arity + 1);
  std::size_t w = 1;
  weights_.push_back(w);
  for (std::size_t d = 0; d < arity; ++d) {
    w *= base();
    if (w > kMaxSize) throw std::invalid_argument("column universe too large");
    weights_.push_back(w);
  }
}

ColumnCode ColumnUniverse::encode(std::span<const Entry> column) const {
  if (column.size() != arity_) throw std::invalid_argument("column arity mismatch");
  std::size_t code = 0;
  for (std::size_t d = 0; d < arity_; ++d) {
    if (column[d] > vars_) throw std::invalid_argument("column entry outside the alphabet");
    code += column[d] * weights_[d];
  }
  return static_cast<ColumnCode>(code);
}

std::vector<Entry> ColumnUniverse::decode(ColumnCode code) const {
  std::vector<Entry> out(arity_);
  for (std::size_t d = 0; d < arity_; ++d) {
    out[d] = static_cast<Entry>(code % base());
    code /= base();
  }
  return out;
}

std::size_t ColumnSet::count() const noexcept {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool ColumnSet::is_subset_of(const ColumnSet& other) const noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & ~other.words_[i]) return false;
  return true;
}

std::vector<ColumnCode> ColumnSet::members() const {
  std::vector<ColumnCode> out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    std::uint64_t w = words_[i];
    while (w) {
      out.push_back(static_cast<ColumnCode>(i * 64 + std::countr_zero(w)));
      w &= w - 1;
    }
  }
  return out;
}

ColumnSet col_star(const ExtendedMatrix& n, const ColumnUniverse& u) {
  if (n.rows() != u.arity()) throw std::invalid_argument("col_star: arity mismatch");
  ColumnSet s(u.size());
  s.insert(ColumnUniverse::kStarColumn);
  for (std::size_t j = 0; j < n.left_cols(); ++j) s.insert(u.encode(n.column(j)));
  return s;
}

std::vector<std::vector<InstantiatedRow>> build_instantiated_rows(
    std::span<const ExtendedMatrix> hypotheses, unsigned target_vars, bool dedup) {
  std::vector<std::vector<InstantiatedRow>> out;
  out.reserve(hypotheses.size());
  for (std::size_t mi = 0; mi < hypotheses.size(); ++mi) {
    const ExtendedMatrix& m = hypotheses[mi];
    std::vector<InstantiatedRow> rows;
    std::set<std::vector<Entry>> seen;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      std::vector<Entry> map(m.vars(), 0);
      do {
        auto tuple = apply_map(m.row(i), map);
        if (!dedup || seen.insert(tuple).second)
          rows.push_back({mi, i, map, std::move(tuple)});
      } while (next_map(map, target_vars));
    }
    out.push_back(std::move(rows));
  }
  return out;
}

ClosureEngine::ClosureEngine(std::span<const ExtendedMatrix> hypotheses,
                             const ColumnUniverse& universe)
    : hypotheses_(hypotheses.begin(), hypotheses.end()),
      universe_(universe),
      rows_(build_instantiated_rows(hypotheses, universe.vars())) {
  compiled_.reserve(rows_.size());
  for (std::size_t mi = 0; mi < rows_.size(); ++mi) {
    Compiled c;
    c.width = hypotheses_[mi].width();
    for (std::size_t t = 0; t < rows_[mi].size(); ++t) {
      c.tuples.insert(c.tuples.end(), rows_[mi][t].tuple.begin(), rows_[mi][t].tuple.end());
      c.source.push_back(t);
    }
    compiled_.push_back(std::move(c));
  }
}

namespace {

// Prefix tables for the pruned search: in_set[d] holds the codes of
// coordinates 0..d-1 of columns of R, open[d] those of columns outside R.
struct Prefixes {
  std::vector<Words> in_set;
  std::vector<Words> open;
};

Prefixes build_prefixes(const ColumnSet& set, const ColumnUniverse& u, const ColumnSet* allowed) {
  const std::size_t n = u.arity();
  Prefixes p;
  p.in_set.resize(n + 1);
  p.open.resize(n + 1);
  for (std::size_t d = 0; d <= n; ++d) {
    p.in_set[d].assign((u.weight(d) + 63) / 64, 0);
    p.open[d].assign((u.weight(d) + 63) / 64, 0);
  }
  for (std::size_t c = 0; c < u.size(); ++c) {
    const auto code = static_cast<ColumnCode>(c);
    if (!set.contains(code) && allowed && !allowed->contains(code)) continue;
    auto& table = set.contains(code) ? p.in_set : p.open;
    for (std::size_t d = 0; d <= n; ++d) set_bit(table[d], c % u.weight(d));
  }
  return p;
}

}  // namespace

void ClosureEngine::round(const ColumnSet& set, std::optional<ColumnCode> goal,
                          std::vector<Found>& found, bool want_witness,
                          const ColumnSet* allowed) const {
  const std::size_t n = universe_.arity();
  const Prefixes pre = build_prefixes(set, universe_, allowed);
  ColumnSet seen(universe_.size());

  for (std::size_t mi = 0; mi < compiled_.size(); ++mi) {
    const Compiled& c = compiled_[mi];
    const std::size_t w = c.width, left = w - 1;
    const std::size_t count = c.source.size();
    if (count == 0) continue;
    std::vector<ColumnCode> codes((n + 1) * w, 0);
    std::vector<std::size_t> choice(n, 0);
    bool stop = false;

    auto dfs = [&](auto&& self, std::size_t d) -> void {
      if (d == n) {
        const ColumnCode r = codes[n * w + left];
        if (set.contains(r) || !seen.insert(r)) return;
        Found f{r, mi, {}};
        if (want_witness) f.choice = choice;
        found.push_back(std::move(f));
        if (goal && r == *goal) stop = true;
        return;
      }
      const ColumnCode weight = universe_.weight(d);
      for (std::size_t t = 0; t < count && !stop; ++t) {
        const Entry* tup = c.tuples.data() + t * w;
        const ColumnCode rc = codes[d * w + left] + tup[left] * weight;
        if (!test_bit(pre.open[d + 1], rc)) continue;
        bool ok = true;
        for (std::size_t j = 0; j < left; ++j) {
          const ColumnCode lc = codes[d * w + j] + tup[j] * weight;
          if (!test_bit(pre.in_set[d + 1], lc)) {
            ok = false;
            break;
          }
          codes[(d + 1) * w + j] = lc;
        }
        if (!ok) continue;
        codes[(d + 1) * w + left] = rc;
        choice[d] = c.source[t];
        self(self, d + 1);
      }
    };
    dfs(dfs, 0);
    if (stop) return;
  }
}

std::vector<ColumnCode> ClosureEngine::one_step(const ColumnSet& set) const {
  std::vector<Found> found;
  round(set, std::nullopt, found, false, nullptr);
  std::vector<ColumnCode> out;
  out.reserve(found.size());
  for (const auto& f : found) out.push_back(f.code);
  return out;
}

void ClosureEngine::close(ColumnSet& set, std::optional<ColumnCode> goal,
                          std::vector<TableauStep>* log, const ColumnSet* allowed) const {
  if (set.universe_size() != universe_.size())
    throw std::invalid_argument("closure: column set does not match the universe");
  const std::size_t n = universe_.arity();
  while (!(goal && set.contains(*goal))) {
    std::vector<Found> found;
    round(set, goal, found, log != nullptr, allowed);
    if (found.empty()) break;
    for (const auto& f : found) {
      if (log) {
        TableauStep step;
        step.added = universe_.decode(f.code);
        const auto& rows = rows_[f.matrix];
        const std::size_t left = hypotheses_[f.matrix].left_cols();
        for (std::size_t d = 0; d < n; ++d) {
          const auto& ir = rows[f.choice[d]];
          step.witnesses.push_back({ir.matrix, ir.row, ir.map});
        }
        for (std::size_t j = 0; j < left; ++j) {
          std::vector<Entry> col(n);
          for (std::size_t d = 0; d < n; ++d) col[d] = rows[f.choice[d]].tuple[j];
          if (std::find(step.consumed.begin(), step.consumed.end(), col) == step.consumed.end())
            step.consumed.push_back(std::move(col));
        }
        log->push_back(std::move(step));
      }
      set.insert(f.code);
    }
  }
}

ClosureResult closure(std::span<const ExtendedMatrix> hypotheses, const ColumnUniverse& universe,
                      const ColumnSet& seed, bool record) {
  if (!seed.contains(ColumnUniverse::kStarColumn))
    throw std::invalid_argument("closure: seed relation is not pointed");
  ClosureResult result{seed, {}};
  ClosureEngine engine(hypotheses, universe);
  engine.close(result.columns, std::nullopt, record ? &result.steps : nullptr);
  return result;
}

ColumnSet closed_columns(std::span<const ExtendedMatrix> hypotheses, const ExtendedMatrix& goal) {
  const ColumnUniverse u(goal.rows(), goal.vars());
  return closure(hypotheses, u, col_star(goal, u), false).columns;
}

namespace {

TableauStep star_step(std::size_t arity) { return {std::vector<Entry>(arity, kStar), {}, {}}; }

// Re-derives the goal inside a shrinking set of permitted columns until no
// intermediate column can be dropped.
std::vector<TableauStep> irredundant_steps(const ClosureEngine& engine, const ExtendedMatrix& goal,
                                           const std::vector<TableauStep>& log) {
  const ColumnUniverse& u = engine.universe();
  const ColumnSet seed = col_star(goal, u);
  const ColumnCode target = u.encode(goal.right_column());
  ColumnSet allowed = seed;
  std::vector<ColumnCode> added;
  for (std::size_t s = 1; s < log.size(); ++s) {
    added.push_back(u.encode(log[s].added));
    allowed.insert(added.back());
  }
  // Columns with fewer ∗ entries are dropped first, later steps first.
  auto stars = [&](ColumnCode c) {
    const auto v = u.decode(c);
    return std::count(v.begin(), v.end(), kStar);
  };
  std::vector<std::size_t> order(added.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto sa = stars(added[a]), sb = stars(added[b]);
    return sa != sb ? sa < sb : a > b;
  });
  for (const std::size_t s : order) {
    if (added[s] == target || seed.contains(added[s])) continue;
    ColumnSet trial_allowed = allowed;
    trial_allowed.words()[added[s] >> 6] &= ~(std::uint64_t{1} << (added[s] & 63));
    ColumnSet trial = seed;
    engine.close(trial, target, nullptr, &trial_allowed);
    if (trial.contains(target)) allowed = std::move(trial_allowed);
  }
  std::vector<TableauStep> out{star_step(goal.rows())};
  ColumnSet set = seed;
  engine.close(set, target, &out, &allowed);
  return out;
}

}  // namespace

Decision decide(std::span<const ExtendedMatrix> hypotheses, std::span<const ExtendedMatrix> goals,
                bool with_proofs) {
  Decision result;
  for (const auto& m : hypotheses) {
    if (is_trivial(m)) {
      result.verdict = true;
      return result;
    }
  }
  const std::vector<ExtendedMatrix> hyp(hypotheses.begin(), hypotheses.end());
  for (const auto& goal : goals) {
    const ColumnUniverse u(goal.rows(), goal.vars());
    const ClosureEngine engine(hyp, u);
    ColumnSet set = col_star(goal, u);
    const ColumnCode target = u.encode(goal.right_column());
    std::vector<TableauStep> log;
    if (with_proofs) log.push_back(star_step(goal.rows()));
    engine.close(set, target, with_proofs ? &log : nullptr);
    const bool reached = set.contains(target);
    if (with_proofs) {
      TableauProof proof{goal, hyp, reached ? irredundant_steps(engine, goal, log) : std::move(log), reached};
      if (!reached) result.proofs.clear();
      result.proofs.push_back(std::move(proof));
    }
    if (!reached) {
      result.verdict = false;
      return result;
    }
  }
  result.verdict = true;
  return result;
}

bool implies(std::span<const ExtendedMatrix> hypotheses, std::span<const ExtendedMatrix> goals) {
  return decide(hypotheses, goals, false).verdict;
}

bool implies(const ExtendedMatrix& hypothesis, const ExtendedMatrix& goal) {
  return implies(std::span(&hypothesis, 1), std::span(&goal, 1));
}

bool equivalent(const ExtendedMatrix& a, const ExtendedMatrix& b) {
  return implies(a, b) && implies(b, a);
}

namespace {

TableauCheck fail(std::size_t step, std::string message) { return {false, step, std::move(message)}; }

// Naive search for an interpretation adding a column outside `rel`.
bool extends(const ExtendedMatrix& m, unsigned vars, const std::set<std::vector<Entry>>& rel,
             std::size_t arity) {
  std::vector<std::vector<Entry>> tuples;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::vector<Entry> map(m.vars(), 0);
    do tuples.push_back(apply_map(m.row(i), map));
    while (next_map(map, vars));
  }
  const std::size_t left = m.left_cols();
  std::vector<std::size_t> pick(arity, 0);
  auto column = [&](std::size_t j, std::size_t upto) {
    std::vector<Entry> c(upto);
    for (std::size_t d = 0; d < upto; ++d) c[d] = tuples[pick[d]][j];
    return c;
  };
  auto rec = [&](auto&& self, std::size_t d) -> bool {
    if (d == arity) {
      for (std::size_t j = 0; j < left; ++j)
        if (!rel.contains(column(j, arity))) return false;
      return !rel.contains(column(left, arity));
    }
    for (std::size_t t = 0; t < tuples.size(); ++t) {
      pick[d] = t;
      if (self(self, d + 1)) return true;
    }
    return false;
  };
  return rec(rec, 0);
}

}  // namespace

TableauCheck check_tableau(const TableauProof& proof) {
  const ExtendedMatrix& goal = proof.goal;
  const std::size_t n = goal.rows();
  const unsigned k = goal.vars();
  const auto& steps = proof.steps;

  std::set<std::vector<Entry>> rel;
  for (std::size_t j = 0; j < goal.left_cols(); ++j) rel.insert(goal.column(j));

  if (steps.empty()) return fail(0, "missing initial all-star step");
  if (steps[0].added != std::vector<Entry>(n, kStar) || !steps[0].witnesses.empty())
    return fail(0, "first step must add the all-star column without witnesses");
  rel.insert(steps[0].added);

  for (std::size_t s = 1; s < steps.size(); ++s) {
    const TableauStep& step = steps[s];
    if (step.witnesses.size() != n) return fail(s, "expected one witness per coordinate");
    const std::size_t mi = step.witnesses[0].matrix;
    if (mi >= proof.hypotheses.size()) return fail(s, "witness refers to an unknown matrix");
    const ExtendedMatrix& m = proof.hypotheses[mi];
    std::vector<std::vector<Entry>> tuples;
    for (const auto& w : step.witnesses) {
      if (w.matrix != mi) return fail(s, "witnesses mix rows of different matrices");
      if (w.row >= m.rows()) return fail(s, "witness row out of range");
      if (w.map.size() != m.vars()) return fail(s, "witness map has the wrong length");
      for (Entry e : w.map)
        if (e > k) return fail(s, "witness map leaves the goal alphabet");
      tuples.push_back(apply_map(m.row(w.row), w.map));
    }
    std::set<std::vector<Entry>> needed;
    for (std::size_t j = 0; j <= m.left_cols(); ++j) {
      std::vector<Entry> col(n);
      for (std::size_t d = 0; d < n; ++d) col[d] = tuples[d][j];
      if (j == m.left_cols()) {
        if (col != step.added) return fail(s, "added column does not match the witnesses");
      } else {
        needed.insert(std::move(col));
      }
    }
    const std::set<std::vector<Entry>> consumed(step.consumed.begin(), step.consumed.end());
    if (consumed != needed) return fail(s, "consumed columns do not match the witnesses");
    for (const auto& c : consumed)
      if (!rel.contains(c)) return fail(s, "consumed column not yet present");
    rel.insert(step.added);
  }

  const bool reached = rel.contains(goal.right_column());
  if (proof.verdict) {
    if (!reached) return fail(steps.size(), "goal column not reached");
    return {true, std::nullopt, "ok"};
  }
  if (reached) return fail(steps.size(), "negative verdict but the goal column is present");
  for (const auto& m : proof.hypotheses)
    if (extends(m, k, rel, n)) return fail(steps.size(), "negative verdict on a non-closed relation");
  return {true, std::nullopt, "ok"};
}

CompiledTheory::CompiledTheory(const ExtendedMatrix& hypothesis, const ColumnUniverse& universe)
    : universe_(universe), trivial_(is_trivial(hypothesis)) {
  const std::size_t n = universe.arity();
  words_ = (universe.size() + 63) / 64;
  const auto rows = build_instantiated_rows(std::span(&hypothesis, 1), universe.vars()).front();
  const std::size_t w = hypothesis.width(), left = w - 1, count = rows.size();

  // Each leaf record: conclusion followed by words_ premise words.
  const std::size_t stride = words_ + 1;
  std::vector<std::uint64_t> leaves;
  std::vector<ColumnCode> codes((n + 1) * w, 0);
  auto dfs = [&](auto&& self, std::size_t d) -> void {
    if (d == n) {
      const ColumnCode r = codes[n * w + left];
      if (r == ColumnUniverse::kStarColumn) return;
      const std::size_t at = leaves.size();
      leaves.resize(at + stride, 0);
      leaves[at] = r;
      for (std::size_t j = 0; j < left; ++j) {
        const ColumnCode c = codes[n * w + j];
        if (c == r) {
          leaves.resize(at);
          return;
        }
        if (c != ColumnUniverse::kStarColumn)
          leaves[at + 1 + (c >> 6)] |= std::uint64_t{1} << (c & 63);
      }
      return;
    }
    const ColumnCode weight = universe_.weight(d);
    for (std::size_t t = 0; t < count; ++t) {
      const auto& tup = rows[t].tuple;
      for (std::size_t j = 0; j < w; ++j) codes[(d + 1) * w + j] = codes[d * w + j] + tup[j] * weight;
      self(self, d + 1);
    }
  };
  if (count > 0) dfs(dfs, 0);

  const std::size_t total = leaves.size() / stride;
  auto popcount = [&](std::size_t i) {
    std::size_t c = 0;
    for (std::size_t q = 1; q < stride; ++q) c += std::popcount(leaves[i * stride + q]);
    return c;
  };
  std::vector<std::size_t> pop(total);
  for (std::size_t i = 0; i < total; ++i) pop[i] = popcount(i);
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  auto record = [&](std::size_t i) { return std::span(leaves).subspan(i * stride, stride); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = record(a), rb = record(b);
    if (ra[0] != rb[0]) return ra[0] < rb[0];
    if (pop[a] != pop[b]) return pop[a] < pop[b];
    return std::lexicographical_compare(ra.begin() + 1, ra.end(), rb.begin() + 1, rb.end());
  });

  std::size_t group_start = 0;
  for (std::size_t idx = 0; idx < order.size(); ++idx) {
    const auto rec = record(order[idx]);
    if (idx > 0 && record(order[idx - 1])[0] != rec[0]) group_start = conclusion_.size();
    bool dominated = false;
    for (std::size_t g = group_start; g < conclusion_.size() && !dominated; ++g) {
      const std::uint64_t* p = premise_.data() + g * words_;
      bool subset = true;
      for (std::size_t q = 0; q < words_ && subset; ++q) subset = (p[q] & ~rec[q + 1]) == 0;
      dominated = subset;
    }
    if (dominated) continue;
    conclusion_.push_back(static_cast<ColumnCode>(rec[0]));
    premise_.insert(premise_.end(), rec.begin() + 1, rec.end());
  }
}

void CompiledTheory::close(ColumnSet& set, std::optional<ColumnCode> goal) const {
  if (set.universe_size() != universe_.size())
    throw std::invalid_argument("closure: column set does not match the universe");
  auto words = set.words();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < conclusion_.size(); ++r) {
      const ColumnCode c = conclusion_[r];
      if (set.contains(c)) continue;
      const std::uint64_t* p = premise_.data() + r * words_;
      bool fires = true;
      for (std::size_t q = 0; q < words_ && fires; ++q) fires = (p[q] & ~words[q]) == 0;
      if (!fires) continue;
      set.insert(c);
      changed = true;
      if (goal && c == *goal) return;
    }
  }
}

bool CompiledTheory::implies(const ExtendedMatrix& goal) const {
  if (trivial_) return true;
  ColumnSet set = col_star(goal, universe_);
  const ColumnCode target = universe_.encode(goal.right_column());
  if (set.contains(target)) return true;
  close(set, target);
  return set.contains(target);
}

}  // namespace mclex
