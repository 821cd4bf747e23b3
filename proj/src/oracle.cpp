#include "mclex/oracle.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "mclex/degeneracy.hpp"

namespace mclex::oracle {

namespace {

bool next_digits(std::vector<unsigned>& digits, unsigned base) {
  for (auto& d : digits) {
    if (d + 1 < base) {
      ++d;
      return true;
    }
    d = 0;
  }
  return false;
}

unsigned image(const std::vector<unsigned>& map, Entry e) { return is_star(e) ? 0 : map[e - 1]; }

void check_carriers(const std::vector<PointedSet>& carriers) {
  if (carriers.empty() || carriers.size() > kMaxArity) throw std::invalid_argument("oracle: arity out of range");
  for (auto c : carriers)
    if (c.size < 1 || c.size > kMaxCarrier) throw std::invalid_argument("oracle: carrier size out of range");
}

ExtendedMatrix select_rows(const ExtendedMatrix& m, const std::vector<unsigned>& rows) {
  std::vector<Entry> grid;
  for (unsigned i : rows) grid.insert(grid.end(), m.row(i).begin(), m.row(i).end());
  return ExtendedMatrix(rows.size(), m.left_cols(), m.vars(), std::move(grid));
}

}  // namespace

ConcreteRelation::ConcreteRelation(std::vector<PointedSet> carriers) : carriers_(std::move(carriers)) {
  check_carriers(carriers_);
  tuples_.insert(Tuple(carriers_.size(), 0));
}

ConcreteRelation::ConcreteRelation(std::vector<PointedSet> carriers, const std::vector<Tuple>& tuples)
    : ConcreteRelation(std::move(carriers)) {
  for (const auto& t : tuples) insert(t);
}

ConcreteRelation ConcreteRelation::on(PointedSet carrier, std::size_t arity,
                                      const std::vector<Tuple>& tuples) {
  return ConcreteRelation(std::vector<PointedSet>(arity, carrier), tuples);
}

bool ConcreteRelation::single_carrier() const noexcept {
  return std::all_of(carriers_.begin(), carriers_.end(),
                     [&](PointedSet c) { return c.size == carriers_.front().size; });
}

bool ConcreteRelation::insert(const Tuple& t) {
  if (t.size() != arity()) throw std::invalid_argument("oracle: tuple arity mismatch");
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= carriers_[i].size) throw std::invalid_argument("oracle: tuple leaves its carrier");
  return tuples_.insert(t).second;
}

std::optional<RowInterpretation> strict_counterexample(const ConcreteRelation& r,
                                                       const ExtendedMatrix& m) {
  const std::size_t n = m.rows();
  if (r.arity() != n) throw std::invalid_argument("oracle: relation arity differs from the row count");
  std::vector<std::vector<unsigned>> maps(n, std::vector<unsigned>(m.vars(), 0));
  while (true) {
    RowInterpretation interp;
    interp.maps = maps;
    bool inside = true;
    for (std::size_t j = 0; j < m.left_cols() && inside; ++j) {
      Tuple col(n);
      for (std::size_t i = 0; i < n; ++i) col[i] = image(maps[i], m.at(i, j));
      inside = r.contains(col);
      interp.left_columns.push_back(std::move(col));
    }
    if (inside) {
      interp.right_column.resize(n);
      for (std::size_t i = 0; i < n; ++i) interp.right_column[i] = image(maps[i], m.right(i));
      if (!r.contains(interp.right_column)) return interp;
    }
    std::size_t i = 0;
    while (i < n && !next_digits(maps[i], r.carriers()[i].size)) ++i;
    if (i == n) return std::nullopt;
  }
}

bool strictly_closed(const ConcreteRelation& r, const ExtendedMatrix& m) {
  return !strict_counterexample(r, m);
}

bool closed(const ConcreteRelation& r, const ExtendedMatrix& m) {
  const std::size_t n = m.rows();
  if (r.arity() != n) throw std::invalid_argument("oracle: relation arity differs from the row count");
  if (!r.single_carrier()) throw std::invalid_argument("oracle: closed() needs a single carrier");
  std::vector<unsigned> map(m.vars(), 0);
  do {
    bool inside = true;
    for (std::size_t j = 0; j < m.left_cols() && inside; ++j) {
      Tuple col(n);
      for (std::size_t i = 0; i < n; ++i) col[i] = image(map, m.at(i, j));
      inside = r.contains(col);
    }
    if (!inside) continue;
    Tuple right(n);
    for (std::size_t i = 0; i < n; ++i) right[i] = image(map, m.right(i));
    if (!r.contains(right)) return false;
  } while (next_digits(map, r.carriers().front().size));
  return true;
}

bool sharp(const ConcreteRelation& r, const ExtendedMatrix& m) {
  std::vector<unsigned> rows(r.arity(), 0);
  do {
    if (!strictly_closed(r, select_rows(m, rows))) return false;
  } while (next_digits(rows, static_cast<unsigned>(m.rows())));
  return true;
}

bool is_functional(const ExtendedMatrix& m, PointedSet y) {
  const std::size_t n = m.rows();
  std::vector<std::vector<unsigned>> maps;
  std::vector<unsigned> map(m.vars(), 0);
  do maps.push_back(map);
  while (next_digits(map, y.size));

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ii = 0; ii < n; ++ii)
      for (const auto& f : maps)
        for (const auto& g : maps) {
          bool agree = true;
          for (std::size_t j = 0; j < m.left_cols() && agree; ++j)
            agree = image(f, m.at(i, j)) == image(g, m.at(ii, j));
          if (agree && image(f, m.right(i)) != image(g, m.right(ii))) return false;
        }
  return true;
}

ConcreteRelation left_column_relation(const ExtendedMatrix& m) {
  ConcreteRelation r = ConcreteRelation::on({m.vars() + 1}, m.rows(), {});
  for (std::size_t j = 0; j < m.left_cols(); ++j) {
    Tuple t(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) t[i] = m.at(i, j);
    r.insert(t);
  }
  return r;
}

bool set_star_has_closed_relations(const ExtendedMatrix& m) {
  return closed(left_column_relation(m), m);
}

ConcreteRelation reflect(const ConcreteRelation& r, std::span<const ExtendedMatrix> hypotheses) {
  if (!r.single_carrier()) throw std::invalid_argument("oracle: reflect() needs a single carrier");
  ConcreteRelation out = r;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& m : hypotheses) {
      std::vector<unsigned> rows(r.arity(), 0);
      do {
        const ExtendedMatrix selected = select_rows(m, rows);
        while (auto ce = strict_counterexample(out, selected)) {
          out.insert(ce->right_column);
          changed = true;
        }
      } while (next_digits(rows, static_cast<unsigned>(m.rows())));
    }
  }
  return out;
}

bool has_forbidden_reduction(const ExtendedMatrix& m) {
  // Shapes as (right column, distinct left columns) over {∗ = 0, a = 1}.
  using Shape = std::pair<Tuple, std::set<Tuple>>;
  const std::vector<Shape> forbidden{
      {{1}, {}},
      {{1}, {{0}}},
      {{1, 0}, {{1, 1}}},
      {{1, 0}, {{1, 1}, {0, 0}}},
  };
  for (std::size_t arity = 1; arity <= 2; ++arity) {
    std::vector<unsigned> rows(arity, 0);
    do {
      std::vector<std::vector<unsigned>> maps(arity, std::vector<unsigned>(m.vars(), 0));
      while (true) {
        Shape shape;
        shape.first.resize(arity);
        for (std::size_t d = 0; d < arity; ++d) shape.first[d] = image(maps[d], m.right(rows[d]));
        for (std::size_t j = 0; j < m.left_cols(); ++j) {
          Tuple col(arity);
          for (std::size_t d = 0; d < arity; ++d) col[d] = image(maps[d], m.at(rows[d], j));
          shape.second.insert(std::move(col));
        }
        if (std::find(forbidden.begin(), forbidden.end(), shape) != forbidden.end()) return true;
        std::size_t d = 0;
        while (d < arity && !next_digits(maps[d], 2)) ++d;
        if (d == arity) break;
      }
    } while (next_digits(rows, static_cast<unsigned>(m.rows())));
  }
  return false;
}

std::vector<ConcreteRelation> all_relations(PointedSet carrier, std::size_t arity) {
  std::vector<Tuple> others;
  Tuple t(arity, 0);
  while (next_digits(t, carrier.size)) others.push_back(t);
  if (others.size() > 20) throw std::invalid_argument("oracle: too many relations to enumerate");
  std::vector<ConcreteRelation> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << others.size()); ++mask) {
    ConcreteRelation r = ConcreteRelation::on(carrier, arity, {});
    for (std::size_t b = 0; b < others.size(); ++b)
      if (mask >> b & 1) r.insert(others[b]);
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

void check_one(const ExtendedMatrix& m, BatteryReport& report) {
  ++report.matrices;
  const bool trivial = is_trivial(m);
  const bool by_reduction = has_forbidden_reduction(m);
  const bool by_two = !is_functional(m, {2});
  bool agree = trivial == by_reduction && trivial == by_two;
  if (agree && m.vars() <= 2) agree = trivial == !is_functional(m, {3});
  if (agree && m.vars() <= 2 && m.rows() <= 3) agree = trivial == !is_functional(m, {4});
  const bool anti_agree = is_anti_trivial(m) == set_star_has_closed_relations(m);
  if (agree && anti_agree) return;
  ++report.disagreements;
  if (report.failures.size() < 20) report.failures.push_back(m.to_string());
}

}  // namespace

BatteryReport run_battery(std::size_t max_rows, std::size_t max_left, unsigned max_vars,
                          std::size_t random_samples, unsigned seed) {
  BatteryReport report;
  for (std::size_t n = 1; n <= max_rows; ++n)
    for (std::size_t left = 0; left <= max_left; ++left)
      for (unsigned k = 0; k <= max_vars; ++k) {
        const std::size_t cells = n * (left + 1);
        std::vector<unsigned> digits(cells, 0);
        do {
          std::vector<Entry> grid(digits.begin(), digits.end());
          const ExtendedMatrix m(n, left, k, std::move(grid));
          if (m.max_var() == k) check_one(m, report);
        } while (next_digits(digits, k + 1));
      }
  std::mt19937 rng(seed);
  for (std::size_t s = 0; s < random_samples; ++s) {
    const std::size_t n = 1 + rng() % 4, left = rng() % 5;
    const unsigned k = rng() % 4;
    std::vector<Entry> grid(n * (left + 1));
    for (auto& e : grid) e = static_cast<Entry>(rng() % (k + 1));
    check_one(ExtendedMatrix(n, left, k, std::move(grid)), report);
  }
  return report;
}

}  // namespace mclex::oracle
