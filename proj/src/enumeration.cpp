#include "mclex/enumeration.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "mclex/closure.hpp"
#include "mclex/localization.hpp"

namespace mclex {

namespace {

std::size_t saturating_pow(std::size_t base, std::size_t exp, std::size_t cap) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (r > cap / base) return cap;
    r *= base;
  }
  return r;
}

bool rank_less(const std::vector<Entry>& a, const std::vector<Entry>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](Entry x, Entry y) { return entry_rank(x) < entry_rank(y); });
}

/// Columns of one height over {∗, x_1, ..., x_k} minus the all-∗ column,
/// sorted under x_1 < ... < ∗.
std::vector<std::vector<Entry>> sorted_columns(std::size_t height, unsigned vars) {
  std::vector<std::vector<Entry>> out;
  std::vector<Entry> col(height, 0);
  while (true) {
    if (std::any_of(col.begin(), col.end(), [](Entry e) { return !is_star(e); })) out.push_back(col);
    std::size_t d = 0;
    while (d < height && col[d] == vars) col[d++] = 0;
    if (d == height) break;
    ++col[d];
  }
  std::sort(out.begin(), out.end(), rank_less);
  return out;
}

/// Depth-first choice of strictly increasing left columns for one shape and
/// right column, checking row constraints column by column.
class ShapeSearch {
 public:
  ShapeSearch(std::size_t rows, std::size_t left, std::size_t marked, unsigned vars,
              std::vector<ExtendedMatrix>& out)
      : rows_(rows), left_(left), marked_(marked), vars_(vars), out_(out),
        columns_(sorted_columns(rows, vars)), next_(rows), tied_(rows, true), chosen_() {
    for (std::size_t i = 0; i < rows; ++i) next_[i] = i < marked ? 2 : 1;
  }

  void run() { extend(0); }

 private:
  void extend(std::size_t from) {
    if (chosen_.size() == left_) {
      emit();
      return;
    }
    const std::size_t remaining = left_ - chosen_.size();
    for (std::size_t c = from; c + remaining <= columns_.size(); ++c) {
      const auto& col = columns_[c];
      if (!admissible(col)) continue;
      const auto saved_next = next_;
      const auto saved_tied = tied_;
      apply(col);
      chosen_.push_back(c);
      extend(c + 1);
      chosen_.pop_back();
      next_ = saved_next;
      tied_ = saved_tied;
    }
  }

  bool same_block(std::size_t i) const { return (i < marked_) == (i + 1 < marked_); }

  bool admissible(const std::vector<Entry>& col) const {
    for (std::size_t i = 0; i < rows_; ++i) {
      const Entry e = col[i];
      if (is_star(e) || (i < marked_ && e == 1)) continue;
      if (e > next_[i]) return false;
    }
    for (std::size_t i = 0; i + 1 < rows_; ++i)
      if (same_block(i) && tied_[i] && entry_rank(col[i]) > entry_rank(col[i + 1])) return false;
    return true;
  }

  void apply(const std::vector<Entry>& col) {
    for (std::size_t i = 0; i < rows_; ++i)
      if (col[i] == next_[i]) ++next_[i];
    for (std::size_t i = 0; i + 1 < rows_; ++i)
      if (tied_[i] && col[i] != col[i + 1]) tied_[i] = false;
  }

  void emit() {
    for (std::size_t i = 0; i + 1 < rows_; ++i)
      if (same_block(i) && tied_[i]) return;
    std::vector<Entry> grid(rows_ * (left_ + 1));
    unsigned used = 0;
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < left_; ++j) {
        const Entry e = columns_[chosen_[j]][i];
        grid[i * (left_ + 1) + j] = e;
        used = std::max<unsigned>(used, e);
      }
      grid[i * (left_ + 1) + left_] = i < marked_ ? 1 : kStar;
    }
    if (marked_ > 0) used = std::max(used, 1u);
    out_.emplace_back(rows_, left_, used, std::move(grid));
  }

  std::size_t rows_, left_, marked_;
  unsigned vars_;
  std::vector<ExtendedMatrix>& out_;
  std::vector<std::vector<Entry>> columns_;
  std::vector<unsigned> next_;
  std::vector<bool> tied_;
  std::vector<std::size_t> chosen_;
};

}  // namespace

Window clamp(Window w) {
  if (w.left > 1 && w.vars > w.left - 1) w.vars = static_cast<unsigned>(w.left - 1);
  if (w.vars > 0) {
    const std::size_t cap = saturating_pow(w.vars + 1, w.rows, w.left + 2) - 2;
    w.left = std::min(w.left, cap);
  }
  return w;
}

namespace {

struct Block {
  std::size_t rows;
  std::size_t left;
  unsigned vars;
};

std::vector<Block> blocks_of(Window w, bool caps) {
  if (w.rows == 0) throw std::invalid_argument("generate: a window needs at least one row");
  if (w.vars > kMaxVariable) throw std::invalid_argument("generate: too many variables");
  if (caps) w = clamp(w);
  std::vector<Block> out;
  for (std::size_t rows = 1; rows <= w.rows; ++rows)
    for (std::size_t left = 0; left <= w.left; ++left) {
      unsigned vars = w.vars;
      if (caps && left > 1) vars = std::min<unsigned>(vars, static_cast<unsigned>(left - 1));
      out.push_back({rows, left, vars});
    }
  return out;
}

std::vector<ExtendedMatrix> block_candidates(const Block& b) {
  std::vector<ExtendedMatrix> block;
  for (std::size_t marked = 0; marked <= b.rows; ++marked) {
    if (marked > 0 && b.vars == 0) break;
    ShapeSearch(b.rows, b.left, marked, b.vars, block).run();
  }
  std::vector<std::pair<LexKey, std::size_t>> keys;
  keys.reserve(block.size());
  for (std::size_t i = 0; i < block.size(); ++i) keys.emplace_back(lex_key(block[i]), i);
  std::sort(keys.begin(), keys.end(), [&](const auto& x, const auto& y) {
    const unsigned vx = block[x.second].vars(), vy = block[y.second].vars();
    return vx != vy ? vx < vy : x.first < y.first;
  });
  std::vector<ExtendedMatrix> out;
  out.reserve(block.size());
  for (const auto& [key, i] : keys) out.push_back(std::move(block[i]));
  return out;
}

}  // namespace

void generate(Window w, const std::function<void(const ExtendedMatrix&)>& emit, bool caps) {
  for (const Block& b : blocks_of(w, caps))
    for (const auto& m : block_candidates(b)) emit(m);
}

std::vector<ExtendedMatrix> generate_all(Window w, bool caps) {
  std::vector<ExtendedMatrix> out;
  generate(w, [&](const ExtendedMatrix& m) { out.push_back(m); }, caps);
  return out;
}

ExtendedMatrix pad_rows(const ExtendedMatrix& m, std::size_t rows) {
  if (rows < m.rows()) throw std::invalid_argument("pad_rows: matrix already has more rows");
  if (m.rows() == 0) throw std::invalid_argument("pad_rows: empty matrix");
  std::vector<Entry> grid = m.grid();
  const auto last = m.row(m.rows() - 1);
  for (std::size_t i = m.rows(); i < rows; ++i) grid.insert(grid.end(), last.begin(), last.end());
  return ExtendedMatrix(rows, m.left_cols(), m.vars(), std::move(grid));
}

std::optional<std::size_t> PosetGraph::find(const ExtendedMatrix& canonical) const {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i].canonical == canonical) return i;
  return std::nullopt;
}

namespace {

using Bits = std::vector<std::uint64_t>;

Bits make_bits(std::size_t count) { return Bits((count + 63) / 64, 0); }
void set_bit(Bits& b, std::size_t i) { b[i >> 6] |= std::uint64_t{1} << (i & 63); }
bool get_bit(const Bits& b, std::size_t i) { return (b[i >> 6] >> (i & 63)) & 1u; }

template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  const std::size_t threads = std::min<std::size_t>(std::max(1u, workers), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

/// Whether the hypothesis behind `engine` implies `goal` (engine universe).
bool engine_implies(const ClosureEngine& engine, const ExtendedMatrix& goal) {
  ColumnSet set = col_star(goal, engine.universe());
  const ColumnCode target = engine.universe().encode(goal.right_column());
  if (!set.contains(target)) engine.close(set, target);
  return set.contains(target);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

constexpr std::size_t kSampleSize = 1536;
constexpr std::size_t kMaxProbes = 32;
constexpr std::size_t kLocProbes = 4;
constexpr const char* kCheckpointFile = "mclex-checkpoint.json";

struct ProperClass {
  ExtendedMatrix canonical;
  ExtendedMatrix padded;
  /// Padded canonical over its own variables; the cheap goal for exact
  /// matching.
  ExtendedMatrix goal;
  std::size_t members = 0;
  std::unique_ptr<CompiledTheory> theory;
};

/// Partition of proper candidates into classes, bucketed by which probe
/// classes they contain.
class Classifier {
 public:
  Classifier(Window w, unsigned workers)
      : window_(clamp(w)), universe_(window_.rows, window_.vars), workers_(workers) {}

  const Window& window() const { return window_; }
  const ColumnUniverse& universe() const { return universe_; }

  ExtendedMatrix fit(const ExtendedMatrix& m) const {
    return pad_rows(m, window_.rows).with_vars(window_.vars);
  }

  void set_probes(const std::vector<ExtendedMatrix>& padded) {
    probe_matrices_ = padded;
    probes_.clear();
    for (const auto& p : padded) probes_.push_back(std::make_unique<CompiledTheory>(p, universe_));
  }
  const std::vector<ExtendedMatrix>& probe_matrices() const { return probe_matrices_; }

  Bits fingerprint(const ExtendedMatrix& padded) const {
    Bits b = make_bits(probes_.size());
    for (std::size_t i = 0; i < probes_.size(); ++i)
      if (probes_[i]->implies(padded)) set_bit(b, i);
    return b;
  }

  std::optional<std::size_t> match(const ExtendedMatrix& candidate, const ExtendedMatrix& padded,
                                   const Bits& fp) const {
    const auto it = buckets_.find(fp);
    if (it == buckets_.end()) return std::nullopt;
    for (std::size_t ci : it->second) {
      const ProperClass& c = classes_[ci];
      if (c.theory->implies(padded) && implies(candidate, c.goal)) return ci;
    }
    return std::nullopt;
  }

  std::size_t add(const ExtendedMatrix& canonical, ExtendedMatrix padded, const Bits& fp,
                  std::size_t members) {
    ExtendedMatrix goal = pad_rows(canonical, window_.rows).with_vars(canonical.max_var());
    ProperClass c{canonical, std::move(padded), std::move(goal), members, nullptr};
    c.theory = std::make_unique<CompiledTheory>(c.padded, universe_);
    classes_.push_back(std::move(c));
    buckets_[fp].push_back(classes_.size() - 1);
    return classes_.size() - 1;
  }

  void count_member(std::size_t ci) { ++classes_[ci].members; }

  std::vector<ProperClass>& classes() { return classes_; }
  const std::vector<ProperClass>& classes() const { return classes_; }

  /// Distinct classes among evenly spaced proper candidates.
  void choose_probes(const std::vector<Block>& blocks) {
    std::size_t total = 0;
    for (const auto& b : blocks)
      for (const auto& m : block_candidates(b))
        if (degeneracy_class(m) == Degeneracy::kProper) ++total;
    const std::size_t stride = std::max<std::size_t>(1, total / kSampleSize);
    std::vector<ExtendedMatrix> picked;
    std::vector<std::unique_ptr<CompiledTheory>> theories;
    std::size_t index = 0;
    for (const auto& b : blocks)
      for (const auto& m : block_candidates(b)) {
        if (picked.size() >= kMaxProbes) break;
        if (degeneracy_class(m) != Degeneracy::kProper || index++ % stride != 0) continue;
        const ExtendedMatrix p = fit(m);
        bool known = false;
        for (std::size_t i = 0; i < picked.size() && !known; ++i)
          known = theories[i]->implies(p) && implies(p, picked[i]);
        if (known) continue;
        picked.push_back(p);
        theories.push_back(std::make_unique<CompiledTheory>(p, universe_));
      }
    probe_matrices_ = std::move(picked);
    probes_ = std::move(theories);
  }

  /// up[i] holds j when class i is contained in class j (i != j). Pairs
  /// are skipped when probe containments rule them out, and each positive
  /// answer inherits the up-set of its target once that row is complete.
  std::vector<Bits> order() const {
    const std::size_t count = classes_.size();
    std::vector<Bits> down_fp(count), up_fp(count, make_bits(probes_.size()));
    std::vector<std::size_t> pop(count);
    parallel_for(count, workers_, [&](std::size_t i) {
      down_fp[i] = fingerprint(classes_[i].padded);
      for (std::size_t p = 0; p < probe_matrices_.size(); ++p)
        if (classes_[i].theory->implies(probe_matrices_[p])) set_bit(up_fp[i], p);
      for (auto w : down_fp[i]) pop[i] += std::popcount(w);
    });
    auto subset = [](const Bits& a, const Bits& b) {
      for (std::size_t w = 0; w < a.size(); ++w)
        if (a[w] & ~b[w]) return false;
      return true;
    };
    std::vector<std::size_t> ascending(count);
    for (std::size_t i = 0; i < count; ++i) ascending[i] = i;
    std::stable_sort(ascending.begin(), ascending.end(),
                     [&](std::size_t a, std::size_t b) { return pop[a] < pop[b]; });
    const std::vector<std::size_t> rows(ascending.rbegin(), ascending.rend());

    std::vector<Bits> up(count, make_bits(count));
    std::unique_ptr<std::atomic<bool>[]> done(new std::atomic<bool>[count]);
    for (std::size_t i = 0; i < count; ++i) done[i].store(false);
    parallel_for(count, workers_, [&](std::size_t r) {
      const std::size_t i = rows[r];
      Bits& row = up[i];
      for (std::size_t j : ascending) {
        if (j == i || get_bit(row, j)) continue;
        if (!subset(down_fp[i], down_fp[j]) || !subset(up_fp[j], up_fp[i])) continue;
        if (!classes_[i].theory->implies(classes_[j].padded)) continue;
        set_bit(row, j);
        if (done[j].load(std::memory_order_acquire))
          for (std::size_t w = 0; w < row.size(); ++w) row[w] |= up[j][w];
      }
      done[i].store(true, std::memory_order_release);
    });
    return up;
  }

  /// Localization groups of the proper classes, as lists of class indices
  /// ordered by first member.
  std::vector<std::vector<std::size_t>> loc_groups(const std::vector<Bits>& up) const {
    const std::size_t count = classes_.size();
    std::vector<std::unique_ptr<ClosureEngine>> engines(count);
    std::vector<char> trivial_loc(count, 0);
    parallel_for(count, workers_, [&](std::size_t i) {
      const ExtendedMatrix loc = localize(classes_[i].padded);
      trivial_loc[i] = is_trivial(loc);
      engines[i] = std::make_unique<ClosureEngine>(std::span(&loc, 1), universe_);
    });
    auto loc_below = [&](std::size_t a, std::size_t b) {
      return a == b || get_bit(up[a], b) || trivial_loc[a] ||
             engine_implies(*engines[a], classes_[b].padded);
    };
    std::vector<std::size_t> probes;
    const std::size_t stride = std::max<std::size_t>(1, (count + kLocProbes - 1) / kLocProbes);
    for (std::size_t i = 0; i < count; i += stride) probes.push_back(i);
    std::vector<Bits> fps(count, make_bits(probes.size()));
    parallel_for(count, workers_, [&](std::size_t i) {
      for (std::size_t p = 0; p < probes.size(); ++p)
        if (loc_below(i, probes[p])) set_bit(fps[i], p);
    });
    std::vector<std::vector<std::size_t>> groups;
    std::map<Bits, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < count; ++i) {
      auto& bucket = buckets[fps[i]];
      bool placed = false;
      for (std::size_t g : bucket) {
        const std::size_t rep = groups[g].front();
        if (loc_below(i, rep) && loc_below(rep, i)) {
          groups[g].push_back(i);
          placed = true;
          break;
        }
      }
      if (placed) continue;
      bucket.push_back(groups.size());
      groups.push_back({i});
    }
    return groups;
  }

 private:
  Window window_;
  ColumnUniverse universe_;
  unsigned workers_;
  std::vector<ExtendedMatrix> probe_matrices_;
  std::vector<std::unique_ptr<CompiledTheory>> probes_;
  std::vector<ProperClass> classes_;
  std::map<Bits, std::vector<std::size_t>> buckets_;
};

struct CheckpointState {
  std::size_t next_block = 0;
  std::size_t trivial_members = 0;
  std::size_t anti_members = 0;
};

nlohmann::json window_json(const Window& w) { return nlohmann::json::array({w.rows, w.left, w.vars}); }

void save_checkpoint(const std::filesystem::path& dir, const Classifier& c, const CheckpointState& st) {
  nlohmann::json payload;
  payload["window"] = window_json(c.window());
  payload["next_block"] = st.next_block;
  payload["trivial_members"] = st.trivial_members;
  payload["anti_members"] = st.anti_members;
  payload["probes"] = nlohmann::json::array();
  for (const auto& p : c.probe_matrices()) payload["probes"].push_back(p.to_string());
  payload["classes"] = nlohmann::json::array();
  for (const auto& cl : c.classes())
    payload["classes"].push_back({{"canonical", cl.canonical.to_string()}, {"members", cl.members}});
  const std::string body = payload.dump();
  nlohmann::json doc;
  doc["format"] = "mclex-checkpoint-1";
  doc["checksum"] = hex64(fnv1a(body));
  doc["payload"] = payload;
  std::filesystem::create_directories(dir);
  const auto tmp = dir / (std::string(kCheckpointFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    out << doc.dump() << '\n';
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, dir / kCheckpointFile);
}

/// Restores classifier state; returns nullopt when no checkpoint exists.
std::optional<CheckpointState> load_checkpoint(const std::filesystem::path& dir, Classifier& c) {
  const auto file = dir / kCheckpointFile;
  if (!std::filesystem::exists(file)) return std::nullopt;
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  CheckpointState st;
  try {
    const auto doc = nlohmann::json::parse(ss.str());
    if (doc.at("format") != "mclex-checkpoint-1") throw CheckpointError("unknown checkpoint format");
    const auto& payload = doc.at("payload");
    if (doc.at("checksum").get<std::string>() != hex64(fnv1a(payload.dump())))
      throw CheckpointError("checkpoint checksum mismatch");
    if (payload.at("window") != window_json(c.window()))
      throw CheckpointError("checkpoint belongs to a different window");
    st.next_block = payload.at("next_block").get<std::size_t>();
    st.trivial_members = payload.at("trivial_members").get<std::size_t>();
    st.anti_members = payload.at("anti_members").get<std::size_t>();
    std::vector<ExtendedMatrix> probes;
    for (const auto& p : payload.at("probes")) probes.push_back(c.fit(parse_matrix(p.get<std::string>())));
    c.set_probes(probes);
    for (const auto& cl : payload.at("classes")) {
      const ExtendedMatrix canonical = parse_matrix(cl.at("canonical").get<std::string>());
      const ExtendedMatrix padded = c.fit(canonical);
      c.add(canonical, padded, c.fingerprint(padded), cl.at("members").get<std::size_t>());
    }
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
  }
  return st;
}

std::vector<std::pair<std::size_t, std::size_t>> edges_of(const std::vector<Bits>& up) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < up.size(); ++i)
    for (std::size_t j = 0; j < up.size(); ++j)
      if (get_bit(up[i], j)) out.emplace_back(i, j);
  return out;
}

/// up[i] from an edge list, transitively closed.
std::vector<Bits> closure_of(std::size_t count, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<Bits> up(count, make_bits(count));
  std::vector<std::vector<std::size_t>> succ(count);
  std::vector<std::size_t> indegree(count, 0);
  for (const auto& [a, b] : edges) {
    if (a >= count || b >= count) throw std::invalid_argument("edge endpoint out of range");
    if (a == b) continue;
    succ[a].push_back(b);
    ++indegree[b];
  }
  std::vector<std::size_t> topo;
  for (std::size_t i = 0; i < count; ++i)
    if (indegree[i] == 0) topo.push_back(i);
  for (std::size_t h = 0; h < topo.size(); ++h)
    for (std::size_t b : succ[topo[h]])
      if (--indegree[b] == 0) topo.push_back(b);
  if (topo.size() != count) throw std::invalid_argument("edge relation has a cycle");
  for (std::size_t h = count; h-- > 0;) {
    const std::size_t a = topo[h];
    for (std::size_t b : succ[a]) {
      set_bit(up[a], b);
      for (std::size_t w = 0; w < up[a].size(); ++w) up[a][w] |= up[b][w];
    }
  }
  return up;
}

std::vector<std::pair<std::size_t, std::size_t>> reduce(const std::vector<Bits>& up) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t count = up.size();
  for (std::size_t a = 0; a < count; ++a) {
    Bits covered = make_bits(count);
    for (std::size_t c = 0; c < count; ++c)
      if (get_bit(up[a], c))
        for (std::size_t w = 0; w < covered.size(); ++w) covered[w] |= up[c][w];
    for (std::size_t b = 0; b < count; ++b)
      if (get_bit(up[a], b) && !get_bit(covered, b)) out.emplace_back(a, b);
  }
  return out;
}

std::optional<std::size_t> group_bottom(const std::vector<std::size_t>& members, const std::vector<Bits>& up) {
  for (std::size_t c : members) {
    bool below_all = true;
    for (std::size_t o : members)
      if (o != c && !get_bit(up[c], o)) below_all = false;
    if (below_all) return c;
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> transitive_reduction(
    std::size_t count, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  return reduce(closure_of(count, edges));
}

PosetGraph classify(Window requested, const ClassifyOptions& options) {
  const auto note = [&](const std::string& msg) {
    if (options.progress) options.progress(msg);
  };
  Classifier c(requested, options.workers);
  const auto blocks = blocks_of(requested, true);
  CheckpointState st;
  std::optional<CheckpointState> resumed;
  if (options.checkpoint_dir) resumed = load_checkpoint(*options.checkpoint_dir, c);
  if (resumed) {
    st = *resumed;
    if (st.next_block > blocks.size()) throw CheckpointError("checkpoint block index out of range");
    note("resumed at block " + std::to_string(st.next_block) + " with " +
         std::to_string(c.classes().size()) + " proper classes");
  } else {
    c.choose_probes(blocks);
    note("probes: " + std::to_string(c.probe_matrices().size()));
  }

  for (std::size_t bi = st.next_block; bi < blocks.size(); ++bi) {
    const auto candidates = block_candidates(blocks[bi]);
    std::vector<Degeneracy> kinds(candidates.size());
    std::vector<ExtendedMatrix> padded(candidates.size(), ExtendedMatrix(1, 0, 0, {kStar}));
    std::vector<Bits> fps(candidates.size());
    parallel_for(candidates.size(), options.workers, [&](std::size_t i) {
      kinds[i] = degeneracy_class(candidates[i]);
      if (kinds[i] != Degeneracy::kProper) return;
      padded[i] = c.fit(candidates[i]);
      fps[i] = c.fingerprint(padded[i]);
    });
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (kinds[i] == Degeneracy::kTrivial) {
        ++st.trivial_members;
      } else if (kinds[i] == Degeneracy::kAntiTrivial) {
        ++st.anti_members;
      } else if (auto ci = c.match(candidates[i], padded[i], fps[i])) {
        c.count_member(*ci);
      } else {
        c.add(candidates[i], std::move(padded[i]), fps[i], 1);
      }
    }
    st.next_block = bi + 1;
    if (options.checkpoint_dir) save_checkpoint(*options.checkpoint_dir, c, st);
    note("block " + std::to_string(bi + 1) + "/" + std::to_string(blocks.size()) + " (" +
         std::to_string(blocks[bi].rows) + "x" + std::to_string(blocks[bi].left) + "): " +
         std::to_string(candidates.size()) + " candidates, " + std::to_string(c.classes().size()) +
         " proper classes");
  }

  PosetGraph g;
  g.window = requested;
  const bool has_trivial = c.window().vars > 0;
  g.classes.push_back({parse_matrix("| *"), st.anti_members, Degeneracy::kAntiTrivial});
  if (has_trivial) g.classes.push_back({parse_matrix("| 1"), st.trivial_members, Degeneracy::kTrivial});
  const std::size_t offset = g.classes.size();
  for (const auto& pc : c.classes()) g.classes.push_back({pc.canonical, pc.members, Degeneracy::kProper});
  const std::size_t total = g.classes.size();

  std::vector<Bits> up(total, make_bits(total));
  std::vector<Bits> proper_up;
  if (options.with_order || options.with_groups) {
    note("computing order");
    proper_up = c.order();
    for (std::size_t i = 0; i < proper_up.size(); ++i)
      for (std::size_t j = 0; j < proper_up.size(); ++j)
        if (get_bit(proper_up[i], j)) set_bit(up[offset + i], offset + j);
    for (std::size_t i = 1; i < total; ++i) set_bit(up[i], 0);
    if (has_trivial)
      for (std::size_t j = 0; j < total; ++j)
        if (j != 1) set_bit(up[1], j);
  }
  if (options.with_order) {
    g.edges = edges_of(up);
    g.reduced_edges = reduce(up);
  }
  if (options.with_groups) {
    note("grouping by localization");
    g.groups.push_back({"anti-trivial", {0}, 0});
    if (has_trivial) g.groups.push_back({"trivial", {1}, 1});
    const auto loc_groups = c.loc_groups(proper_up);
    note("labelling " + std::to_string(loc_groups.size()) + " groups");
    for (const auto& members : loc_groups) {
      LocGroup grp;
      for (std::size_t m : members) grp.classes.push_back(offset + m);
      grp.label = loc_label(g.classes[grp.classes.front()].canonical);
      grp.bottom = group_bottom(grp.classes, up);
      g.groups.push_back(std::move(grp));
    }
  }
  return g;
}

PosetGraph subposet_by_localization(const PosetGraph& g, const ExtendedMatrix& anchor) {
  if (!anchor.is_star_free()) throw std::invalid_argument("subposet: the anchor must be free of ∗");
  if (is_trivial(anchor)) throw std::invalid_argument("subposet: the anchor must be nontrivial");
  std::vector<std::size_t> keep;
  std::string label;
  if (!g.groups.empty()) {
    for (const auto& grp : g.groups)
      if (loc_equal(g.classes[grp.classes.front()].canonical, anchor)) {
        keep = grp.classes;
        label = grp.label;
        break;
      }
  } else {
    for (std::size_t i = 0; i < g.classes.size(); ++i)
      if (loc_equal(g.classes[i].canonical, anchor)) keep.push_back(i);
    label = loc_label(anchor);
  }
  std::sort(keep.begin(), keep.end());
  std::vector<std::size_t> index(g.classes.size(), SIZE_MAX);
  PosetGraph out;
  out.window = g.window;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    index[keep[i]] = i;
    out.classes.push_back(g.classes[keep[i]]);
  }
  for (const auto& [a, b] : g.edges)
    if (index[a] != SIZE_MAX && index[b] != SIZE_MAX) out.edges.emplace_back(index[a], index[b]);
  const auto up = closure_of(keep.size(), out.edges);
  out.reduced_edges = reduce(up);
  if (!keep.empty()) {
    LocGroup grp{label, {}, std::nullopt};
    for (std::size_t i = 0; i < keep.size(); ++i) grp.classes.push_back(i);
    grp.bottom = group_bottom(grp.classes, up);
    out.groups.push_back(std::move(grp));
  }
  return out;
}

ExtendedMatrix canonical(const ExtendedMatrix& m, Window w) {
  const ExtendedMatrix norm = normalize(m);
  if (norm.rows() > w.rows || norm.left_cols() > w.left || norm.vars() > w.vars)
    throw std::invalid_argument("canonical: the matrix does not fit the window");
  switch (degeneracy_class(m)) {
    case Degeneracy::kTrivial:
      return parse_matrix("| 1");
    case Degeneracy::kAntiTrivial:
      return parse_matrix("| *");
    case Degeneracy::kProper:
      break;
  }
  const unsigned vars = std::max(clamp(w).vars, norm.vars());
  const ColumnUniverse u(w.rows, vars);
  const auto fit = [&](const ExtendedMatrix& x) { return pad_rows(x, w.rows).with_vars(vars); };
  const ExtendedMatrix target = fit(norm);
  const CompiledTheory theory(target, u);
  for (const Block& b : blocks_of(w, true))
    for (const auto& cand : block_candidates(b)) {
      if (degeneracy_class(cand) != Degeneracy::kProper) continue;
      const ExtendedMatrix x = fit(cand);
      if (theory.implies(x) && implies(x, target)) return cand;
    }
  throw std::logic_error("canonical: no candidate represents the class");
}

namespace {

nlohmann::ordered_json pairs_json(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [a, b] : pairs) arr.push_back({a, b});
  return arr;
}

std::vector<std::pair<std::size_t, std::size_t>> pairs_from(const nlohmann::json& arr) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2) throw std::invalid_argument("poset: malformed edge");
    out.emplace_back(p[0].get<std::size_t>(), p[1].get<std::size_t>());
  }
  return out;
}

void write_lines(std::ostringstream& os, std::string_view key, const nlohmann::ordered_json& arr, bool last) {
  os << " \"" << key << "\": [";
  for (std::size_t i = 0; i < arr.size(); ++i) os << (i ? ",\n  " : "\n  ") << arr[i].dump();
  os << (arr.empty() ? "]" : "\n ]") << (last ? "\n" : ",\n");
}

}  // namespace

std::string to_json(const PosetGraph& g) {
  const nlohmann::ordered_json params = {{"n", g.window.rows}, {"m", g.window.left}, {"k", g.window.vars}};
  auto classes = nlohmann::ordered_json::array();
  for (const auto& c : g.classes)
    classes.push_back({{"canonical", c.canonical.to_string()}, {"members", c.members}});
  auto groups = nlohmann::ordered_json::array();
  for (const auto& grp : g.groups) {
    nlohmann::ordered_json j;
    j["label"] = grp.label;
    j["classIds"] = grp.classes;
    j["bottom"] = grp.bottom ? nlohmann::ordered_json(*grp.bottom) : nlohmann::ordered_json(nullptr);
    groups.push_back(std::move(j));
  }
  std::ostringstream os;
  os << "{\n \"params\": " << params.dump() << ",\n";
  write_lines(os, "classes", classes, false);
  write_lines(os, "edges", pairs_json(g.edges), false);
  write_lines(os, "reducedEdges", pairs_json(g.reduced_edges), false);
  write_lines(os, "groups", groups, true);
  os << "}\n";
  return os.str();
}

PosetGraph poset_from_json(std::string_view text) {
  PosetGraph g;
  try {
    const auto doc = nlohmann::json::parse(text);
    const auto& params = doc.at("params");
    g.window = {params.at("n").get<std::size_t>(), params.at("m").get<std::size_t>(),
                params.at("k").get<unsigned>()};
    for (const auto& c : doc.at("classes")) {
      const ExtendedMatrix m = parse_matrix(c.at("canonical").get<std::string>());
      g.classes.push_back({m, c.at("members").get<std::size_t>(), degeneracy_class(m)});
    }
    g.edges = pairs_from(doc.at("edges"));
    g.reduced_edges = pairs_from(doc.at("reducedEdges"));
    for (const auto& j : doc.at("groups")) {
      LocGroup grp;
      grp.label = j.at("label").get<std::string>();
      grp.classes = j.at("classIds").get<std::vector<std::size_t>>();
      if (j.contains("bottom") && !j.at("bottom").is_null()) grp.bottom = j.at("bottom").get<std::size_t>();
      g.groups.push_back(std::move(grp));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("poset: malformed JSON: ") + e.what());
  }
  const std::size_t count = g.classes.size();
  auto check = [&](std::size_t i) {
    if (i >= count) throw std::invalid_argument("poset: class index out of range");
  };
  for (const auto& [a, b] : g.edges) check(a), check(b);
  for (const auto& [a, b] : g.reduced_edges) check(a), check(b);
  for (const auto& grp : g.groups) {
    for (std::size_t i : grp.classes) check(i);
    if (grp.bottom) check(*grp.bottom);
  }
  return g;
}

namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    if (ch == '\n') {
      out += "\\n";
      continue;
    }
    out += ch;
  }
  return out;
}

}  // namespace

std::string to_dot(const PosetGraph& g) {
  std::ostringstream os;
  os << "digraph mclex {\n  rankdir=BT;\n  node [shape=box, fontname=\"monospace\"];\n";
  std::vector<char> grouped(g.classes.size(), 0);
  auto node = [&](std::size_t i, std::string_view indent) {
    os << indent << "c" << i << " [label=\"" << dot_escape(to_grid(g.classes[i].canonical)) << "\"];\n";
  };
  for (std::size_t gi = 0; gi < g.groups.size(); ++gi) {
    os << "  subgraph cluster_" << gi << " {\n    label=\"" << dot_escape(g.groups[gi].label)
       << "\";\n    style=rounded;\n    color=blue;\n";
    for (std::size_t i : g.groups[gi].classes) {
      node(i, "    ");
      grouped[i] = 1;
    }
    os << "  }\n";
  }
  for (std::size_t i = 0; i < g.classes.size(); ++i)
    if (!grouped[i]) node(i, "  ");
  for (const auto& [a, b] : g.reduced_edges) os << "  c" << a << " -> c" << b << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace mclex
