#include "mclex/matrix.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>
#include <sstream>

namespace mclex {

std::string entry_to_string(Entry e) {
  return is_star(e) ? std::string("*") : std::to_string(static_cast<unsigned>(e));
}

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error("line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

ExtendedMatrix::ExtendedMatrix(std::size_t rows, std::size_t left_cols, unsigned vars,
                               std::vector<Entry> grid)
    : rows_(rows), left_(left_cols), vars_(vars), grid_(std::move(grid)) {
  if (rows_ == 0) throw std::invalid_argument("a matrix needs at least one row");
  if (grid_.size() != rows_ * (left_ + 1))
    throw std::invalid_argument("grid size does not match the matrix shape");
  if (vars_ > kMaxVariable) throw std::invalid_argument("variable budget too large");
  for (Entry e : grid_)
    if (e > vars_)
      throw std::invalid_argument("entry x" + std::to_string(e) +
                                  " exceeds the variable budget " + std::to_string(vars_));
}

ExtendedMatrix ExtendedMatrix::from_rows(const std::vector<std::vector<Entry>>& rows,
                                         std::optional<unsigned> vars) {
  if (rows.empty()) throw std::invalid_argument("a matrix needs at least one row");
  const std::size_t width = rows.front().size();
  if (width == 0) throw std::invalid_argument("every row needs a right entry");
  std::vector<Entry> grid;
  grid.reserve(rows.size() * width);
  unsigned used = 0;
  for (const auto& r : rows) {
    if (r.size() != width) throw std::invalid_argument("ragged rows");
    for (Entry e : r) used = std::max<unsigned>(used, e);
    grid.insert(grid.end(), r.begin(), r.end());
  }
  return ExtendedMatrix(rows.size(), width - 1, vars.value_or(used), std::move(grid));
}

std::vector<Entry> ExtendedMatrix::column(std::size_t j) const {
  std::vector<Entry> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = at(i, j);
  return c;
}

unsigned ExtendedMatrix::max_var() const noexcept {
  unsigned v = 0;
  for (Entry e : grid_) v = std::max<unsigned>(v, e);
  return v;
}

bool ExtendedMatrix::is_star_free() const noexcept {
  return std::none_of(grid_.begin(), grid_.end(), is_star);
}

ExtendedMatrix ExtendedMatrix::with_vars(unsigned vars) const {
  return ExtendedMatrix(rows_, left_, vars, grid_);
}

std::string ExtendedMatrix::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < rows_; ++i) {
    if (i) out += " ; ";
    for (std::size_t j = 0; j < left_; ++j) {
      out += entry_to_string(at(i, j));
      out += ' ';
    }
    out += "| ";
    out += entry_to_string(right(i));
  }
  return out;
}

namespace {

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line = 1;
  std::size_t col = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  void advance() {
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }
};

struct Token {
  enum Kind { kEntry, kBar } kind;
  Entry value = kStar;
  std::size_t line = 0;
  std::size_t col = 0;
};

// Reads a decimal integer at the cursor.
unsigned read_number(Cursor& c) {
  const std::size_t line = c.line, col = c.col;
  unsigned long value = 0;
  while (!c.done() && std::isdigit(static_cast<unsigned char>(c.peek()))) {
    value = value * 10 + static_cast<unsigned long>(c.peek() - '0');
    if (value > 1000000) throw ParseError("number too large", line, col);
    c.advance();
  }
  return static_cast<unsigned>(value);
}

void parse_header(std::string_view line_text, std::size_t line, unsigned out[3]) {
  std::istringstream in{std::string(line_text)};
  std::string tag;
  in >> tag;
  if (tag != "#nmk") throw ParseError("unknown header '" + tag + "'", line, 1);
  for (int i = 0; i < 3; ++i) {
    long v = -1;
    if (!(in >> v) || v < 0) throw ParseError("header expects '#nmk n m k'", line, 1);
    out[i] = static_cast<unsigned>(v);
  }
  std::string extra;
  if (in >> extra) throw ParseError("trailing text in header", line, 1);
}

}  // namespace

ExtendedMatrix parse_matrix(std::string_view text) {
  Cursor c{text};
  std::optional<std::array<unsigned, 3>> header;

  // Optional header: first non-blank line starting with '#'.
  {
    Cursor probe = c;
    while (!probe.done() && std::isspace(static_cast<unsigned char>(probe.peek()))) probe.advance();
    if (!probe.done() && probe.peek() == '#') {
      const std::size_t start = probe.pos, line = probe.line;
      while (!probe.done() && probe.peek() != '\n') probe.advance();
      unsigned values[3];
      parse_header(text.substr(start, probe.pos - start), line, values);
      header = std::array<unsigned, 3>{values[0], values[1], values[2]};
      c = probe;
    }
  }

  std::vector<std::vector<Token>> rows;
  std::vector<std::pair<std::size_t, std::size_t>> row_starts;
  std::vector<Token> current;
  std::pair<std::size_t, std::size_t> current_start{c.line, c.col};

  auto flush = [&] {
    if (!current.empty()) {
      rows.push_back(std::move(current));
      row_starts.push_back(current_start);
    }
    current.clear();
  };

  while (!c.done()) {
    const char ch = c.peek();
    if (ch == ';' || ch == '\n') {
      flush();
      c.advance();
      current_start = {c.line, c.col};
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      c.advance();
    } else if (ch == '*') {
      if (current.empty()) current_start = {c.line, c.col};
      current.push_back({Token::kEntry, kStar, c.line, c.col});
      c.advance();
    } else if (ch == '|') {
      if (current.empty()) current_start = {c.line, c.col};
      current.push_back({Token::kBar, kStar, c.line, c.col});
      c.advance();
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      if (current.empty()) current_start = {c.line, c.col};
      const std::size_t line = c.line, col = c.col;
      const unsigned v = read_number(c);
      if (v == 0) throw ParseError("variable index 0 is not allowed (variables start at 1)", line, col);
      if (v > kMaxVariable)
        throw ParseError("variable index " + std::to_string(v) + " exceeds the supported maximum", line, col);
      current.push_back({Token::kEntry, static_cast<Entry>(v), line, col});
    } else {
      throw ParseError(std::string("unexpected character '") + ch + "'", c.line, c.col);
    }
  }
  flush();

  if (rows.empty()) throw ParseError("empty matrix", c.line, c.col);

  std::vector<std::vector<Entry>> grid_rows;
  std::optional<std::size_t> width;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& toks = rows[r];
    const auto [line, col] = row_starts[r];
    std::size_t bars = 0, bar_at = 0;
    for (std::size_t t = 0; t < toks.size(); ++t)
      if (toks[t].kind == Token::kBar) {
        ++bars;
        bar_at = t;
      }
    if (bars == 0) throw ParseError("missing right-column separator '|'", line, col);
    if (bars > 1) throw ParseError("more than one '|' in a row", line, col);
    const std::size_t after = toks.size() - bar_at - 1;
    if (after != 1) {
      const auto& at = after == 0 ? toks[bar_at] : toks[bar_at + 2];
      throw ParseError("exactly one right entry must follow '|'", at.line, at.col);
    }
    std::vector<Entry> entries;
    for (const auto& t : toks)
      if (t.kind == Token::kEntry) entries.push_back(t.value);
    if (width && *width != entries.size())
      throw ParseError("ragged rows: expected " + std::to_string(*width - 1) +
                           " left entries, found " + std::to_string(entries.size() - 1),
                       line, col);
    width = entries.size();
    grid_rows.push_back(std::move(entries));
  }

  auto m = ExtendedMatrix::from_rows(grid_rows);
  if (header) {
    const auto [hn, hm, hk] = *header;
    if (hn != m.rows() || hm != m.left_cols())
      throw ParseError("header dimensions do not match the matrix", 1, 1);
    if (hk < m.max_var()) throw ParseError("header variable budget is smaller than the largest variable", 1, 1);
    if (hk > kMaxVariable) throw ParseError("header variable budget too large", 1, 1);
    m = m.with_vars(hk);
  }
  return m;
}

LexKey lex_key(const ExtendedMatrix& m) {
  LexKey key{m.rows(), m.left_cols(), {}};
  key.sequence.reserve(m.rows() * m.width());
  for (std::size_t i = 0; i < m.rows(); ++i) key.sequence.push_back(entry_rank(m.right(i)));
  for (std::size_t j = 0; j < m.left_cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) key.sequence.push_back(entry_rank(m.at(i, j)));
  return key;
}

std::strong_ordering canonical_compare(const ExtendedMatrix& a, const ExtendedMatrix& b) {
  if (auto c = a.rows() <=> b.rows(); c != 0) return c;
  if (auto c = a.left_cols() <=> b.left_cols(); c != 0) return c;
  if (auto c = a.max_var() <=> b.max_var(); c != 0) return c;
  return lex_key(a) <=> lex_key(b);
}

ExtendedMatrix rename_rows(const ExtendedMatrix& m) {
  std::vector<Entry> grid(m.grid());
  const std::size_t w = m.width();
  unsigned used = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::vector<Entry> image(m.vars() + 1, kStar);
    Entry next = 1;
    auto visit = [&](std::size_t j) {
      Entry& e = grid[i * w + j];
      if (is_star(e)) return;
      if (image[e] == kStar) image[e] = next++;
      e = image[e];
    };
    visit(m.left_cols());
    for (std::size_t j = 0; j < m.left_cols(); ++j) visit(j);
    used = std::max<unsigned>(used, static_cast<unsigned>(next - 1));
  }
  return ExtendedMatrix(m.rows(), m.left_cols(), std::max(used, m.vars()), std::move(grid));
}

namespace {

using Rows = std::vector<std::vector<Entry>>;

Rows to_rows(const ExtendedMatrix& m) {
  Rows r(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) r[i].assign(m.row(i).begin(), m.row(i).end());
  return r;
}

bool rank_less(const std::vector<Entry>& a, const std::vector<Entry>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](Entry x, Entry y) { return entry_rank(x) < entry_rank(y); });
}

// Removes duplicate rows, keeping the first occurrence.
void dedup_rows(Rows& rows) {
  Rows out;
  for (auto& r : rows)
    if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(std::move(r));
  rows = std::move(out);
}

// Drops all-∗ and duplicate left columns, keeping first occurrences.
void prune_columns(Rows& rows) {
  const std::size_t left = rows.front().size() - 1;
  std::vector<std::vector<Entry>> kept;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < left; ++j) {
    std::vector<Entry> col;
    for (const auto& r : rows) col.push_back(r[j]);
    if (std::all_of(col.begin(), col.end(), is_star)) continue;
    if (std::find(kept.begin(), kept.end(), col) != kept.end()) continue;
    kept.push_back(std::move(col));
    keep.push_back(j);
  }
  for (auto& r : rows) {
    std::vector<Entry> nr;
    for (std::size_t j : keep) nr.push_back(r[j]);
    nr.push_back(r.back());
    r = std::move(nr);
  }
}

void rename(Rows& rows) {
  for (auto& r : rows) {
    std::vector<Entry> image(kMaxVariable + 1, kStar);
    Entry next = 1;
    auto visit = [&](Entry& e) {
      if (is_star(e)) return;
      if (image[e] == kStar) image[e] = next++;
      e = image[e];
    };
    visit(r.back());
    for (std::size_t j = 0; j + 1 < r.size(); ++j) visit(r[j]);
  }
}

void sort_columns(Rows& rows) {
  const std::size_t left = rows.front().size() - 1;
  std::vector<std::vector<Entry>> cols(left);
  for (std::size_t j = 0; j < left; ++j)
    for (const auto& r : rows) cols[j].push_back(r[j]);
  std::stable_sort(cols.begin(), cols.end(), rank_less);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < left; ++j) rows[i][j] = cols[j][i];
}

// Rows compare by right entry first, then left entries left to right; this
// minimizes the column-major reading among row permutations.
void sort_rows(Rows& rows) {
  auto key = [](const std::vector<Entry>& r) {
    std::vector<Entry> k;
    k.reserve(r.size());
    k.push_back(r.back());
    k.insert(k.end(), r.begin(), r.end() - 1);
    return k;
  };
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const auto& a, const auto& b) { return rank_less(key(a), key(b)); });
}

}  // namespace

ExtendedMatrix normalize(const ExtendedMatrix& m) {
  Rows rows = to_rows(m);
  // Each pass is non-increasing in the column-major reading and strictly
  // decreasing unless nothing changes, so the loop terminates.
  for (;;) {
    const Rows before = rows;
    dedup_rows(rows);
    prune_columns(rows);
    rename(rows);
    dedup_rows(rows);
    sort_columns(rows);
    sort_rows(rows);
    if (rows == before) break;
  }
  return ExtendedMatrix::from_rows(rows);
}

std::string maltsev_condition(const ExtendedMatrix& m) {
  auto term = [](Entry e) {
    return is_star(e) ? std::string("∗") : "x" + std::to_string(static_cast<unsigned>(e));
  };
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (i) out += " ; ";
    out += "p(";
    for (std::size_t j = 0; j < m.left_cols(); ++j) {
      if (j) out += ',';
      out += term(m.at(i, j));
    }
    out += ")=";
    out += term(m.right(i));
  }
  return out;
}

std::string to_grid(const ExtendedMatrix& m) {
  std::size_t cell = 1;
  for (Entry e : m.grid()) cell = std::max(cell, entry_to_string(e).size());
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (i) out += '\n';
    for (std::size_t j = 0; j < m.width(); ++j) {
      if (j == m.left_cols()) out += "| ";
      std::string s = entry_to_string(m.at(i, j));
      out += std::string(cell - s.size(), ' ') + s;
      if (j + 1 < m.width()) out += ' ';
    }
  }
  return out;
}

}  // namespace mclex
