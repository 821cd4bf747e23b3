#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mclex/closure.hpp"
#include "mclex/degeneracy.hpp"
#include "mclex/enumeration.hpp"
#include "mclex/localization.hpp"
#include "mclex/matrix.hpp"
#include "mclex/oracle.hpp"
#include "mclex/tableau_io.hpp"

#ifndef MCLEX_VERSION
#define MCLEX_VERSION "dev"
#endif

using namespace mclex;

namespace {

constexpr int kYes = 0;
constexpr int kNo = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw UsageError("cannot write " + path.string());
}

/// A file path when one exists, the matrix text itself otherwise.
ExtendedMatrix load_matrix(const std::string& arg) {
  std::error_code ec;
  const bool is_file = arg.find('|') == std::string::npos && std::filesystem::is_regular_file(arg, ec);
  const std::string text = is_file ? read_file(arg) : arg;
  try {
    return parse_matrix(text);
  } catch (const ParseError& e) {
    throw UsageError((is_file ? arg + ": " : std::string()) + e.what());
  }
}

std::vector<ExtendedMatrix> load_matrices(const std::vector<std::string>& args) {
  std::vector<ExtendedMatrix> out;
  for (const auto& a : args) out.push_back(load_matrix(a));
  return out;
}

int verdict(bool yes) {
  std::cout << (yes ? "true" : "false") << "\n";
  return yes ? kYes : kNo;
}

struct DecideArgs {
  std::vector<std::string> lhs, rhs;
  std::string tableau;
};

int run_decide(const DecideArgs& a) {
  const auto hyps = load_matrices(a.lhs);
  const auto goals = load_matrices(a.rhs);
  const Decision d = decide(hyps, goals, !a.tableau.empty());
  if (!a.tableau.empty()) write_file(a.tableau, tableau_to_json(d.proofs));
  return verdict(d.verdict);
}

int run_check_tableau(const std::string& path) {
  const auto proofs = tableau_from_json(read_file(path));
  bool ok = !proofs.empty();
  for (std::size_t i = 0; i < proofs.size(); ++i) {
    const TableauCheck c = check_tableau(proofs[i]);
    if (c.ok) continue;
    ok = false;
    std::cout << "proof " << i + 1 << ": rejected";
    if (c.failed_step) std::cout << " at step " << *c.failed_step + 1;
    std::cout << ": " << c.message << "\n";
  }
  if (ok) std::cout << "accepted (" << proofs.size() << " proof" << (proofs.size() == 1 ? "" : "s") << ")\n";
  return ok ? kYes : kNo;
}

struct CanonicalArgs {
  std::string matrix;
  std::vector<std::size_t> window;
};

int run_canonical(const CanonicalArgs& a) {
  const ExtendedMatrix m = load_matrix(a.matrix);
  Window w;
  if (a.window.empty()) {
    const ExtendedMatrix norm = normalize(m);
    w = {norm.rows(), norm.left_cols(), norm.vars()};
  } else {
    if (a.window.size() != 3) throw UsageError("--window expects n m k");
    w = {a.window[0], a.window[1], static_cast<unsigned>(a.window[2])};
  }
  std::cout << canonical(m, w).to_string() << "\n";
  return kYes;
}

int run_admissible(const std::string& matrix, unsigned variable) {
  const ExtendedMatrix m = load_matrix(matrix);
  if (!m.is_star_free()) throw UsageError("admissible: the matrix must be free of *");
  if (!uses_variable(m, variable)) std::cerr << "warning: variable " << variable << " does not occur\n";
  const auto w = is_admissible(m, variable);
  if (!w) {
    std::cout << "not admissible\n";
    return kNo;
  }
  std::cout << "admissible: left column " << w->column + 1 << "\n";
  return kYes;
}

struct EnumerateArgs {
  std::size_t n = 0, m = 0;
  unsigned k = 0;
  std::string anchor, out, dot, checkpoint;
  unsigned workers = 1;
  bool no_order = false, no_groups = false, list = false, verbose = false;
};

int run_enumerate(const EnumerateArgs& a) {
  if (a.n < 1) throw UsageError("enumerate: n must be at least 1");
  if (a.workers < 1) throw UsageError("enumerate: --workers must be at least 1");
  ClassifyOptions opts;
  opts.workers = a.workers;
  opts.with_order = !a.no_order;
  opts.with_groups = !a.no_groups;
  std::string root = a.checkpoint;
  if (root.empty())
    if (const char* env = std::getenv("MCLEX_CHECKPOINT_DIR")) root = env;
  if (!root.empty())
    opts.checkpoint_dir = std::filesystem::path(root) /
                          ("mclex-" + std::to_string(a.n) + "-" + std::to_string(a.m) + "-" + std::to_string(a.k));
  if (a.verbose) opts.progress = [](std::string_view s) { std::cerr << s << "\n"; };

  std::optional<ExtendedMatrix> anchor;
  if (!a.anchor.empty()) {
    anchor = load_matrix(a.anchor);
    if (!anchor->is_star_free() || is_trivial(*anchor))
      throw UsageError("--subposet-loc expects a nontrivial matrix free of *");
    if (a.no_order) throw UsageError("--subposet-loc needs the order");
  }

  PosetGraph g = classify({a.n, a.m, a.k}, opts);
  if (anchor) g = subposet_by_localization(g, *anchor);
  if (!a.out.empty()) write_file(a.out, to_json(g));
  if (!a.dot.empty()) write_file(a.dot, to_dot(g));

  std::cout << "classes: " << g.classes.size() << "\n";
  if (!a.no_order) std::cout << "edges: " << g.edges.size() << "\nreduced edges: " << g.reduced_edges.size() << "\n";
  if (!g.groups.empty()) std::cout << "groups: " << g.groups.size() << "\n";
  if (a.list)
    for (std::size_t i = 0; i < g.classes.size(); ++i)
      std::cout << i << "\t" << g.classes[i].canonical.to_string() << "\n";
  return kYes;
}

int run_oracle_check(const std::string& level) {
  const bool full = level == "full";
  const auto report = full ? oracle::run_battery(3, 3, 2, 1000) : oracle::run_battery(2, 3, 2, 200);
  std::cout << "matrices: " << report.matrices << "\ndisagreements: " << report.disagreements << "\n";
  for (const auto& f : report.failures) std::cout << "  " << f << "\n";
  return report.disagreements == 0 ? kYes : kNo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision procedures for matrix properties of pointed categories"};
  app.set_version_flag("--version", std::string("mclex ") + MCLEX_VERSION);
  app.require_subcommand(1);
  int status = kYes;
  std::function<int()> action;

  DecideArgs decide_args;
  auto* decide_cmd = app.add_subcommand("decide", "Decide whether the left matrices imply the right ones");
  decide_cmd->add_option("--lhs", decide_args.lhs, "Hypothesis matrices (file or inline)")->required();
  decide_cmd->add_option("--rhs", decide_args.rhs, "Goal matrices (file or inline)")->required();
  decide_cmd->add_option("--tableau", decide_args.tableau, "Write the certificates as JSON");
  decide_cmd->callback([&] { action = [&] { return run_decide(decide_args); }; });

  std::string matrix_arg, other_arg;
  auto* degeneracy_cmd = app.add_subcommand("degeneracy", "Classify as trivial, anti-trivial or proper");
  degeneracy_cmd->add_option("matrix", matrix_arg)->required();
  degeneracy_cmd->callback([&] {
    action = [&] {
      std::cout << to_string(degeneracy_class(load_matrix(matrix_arg))) << "\n";
      return kYes;
    };
  });

  CanonicalArgs canonical_args;
  auto* canonical_cmd = app.add_subcommand("canonical", "Canonical representative within a window");
  canonical_cmd->add_option("matrix", canonical_args.matrix)->required();
  canonical_cmd->add_option("--window", canonical_args.window, "n m k (default: the normalized dimensions)")
      ->expected(3);
  canonical_cmd->callback([&] { action = [&] { return run_canonical(canonical_args); }; });

  auto* loc_cmd = app.add_subcommand("loc", "Print the localized matrix N_loc");
  loc_cmd->add_option("matrix", matrix_arg)->required();
  loc_cmd->callback([&] {
    action = [&] {
      std::cout << localize(load_matrix(matrix_arg)).to_string() << "\n";
      return kYes;
    };
  });

  auto* loc_equal_cmd = app.add_subcommand("loc-equal", "Whether two matrices have the same localization");
  loc_equal_cmd->add_option("a", matrix_arg)->required();
  loc_equal_cmd->add_option("b", other_arg)->required();
  loc_equal_cmd->callback([&] {
    action = [&] { return verdict(loc_equal(load_matrix(matrix_arg), load_matrix(other_arg))); };
  });

  unsigned variable = 0;
  auto* admissible_cmd = app.add_subcommand("admissible", "Whether (M, x) is an admissible pair");
  admissible_cmd->add_option("matrix", matrix_arg)->required();
  admissible_cmd->add_option("var", variable, "Variable index")->required()->check(CLI::PositiveNumber);
  admissible_cmd->callback([&] { action = [&] { return run_admissible(matrix_arg, variable); }; });

  EnumerateArgs enum_args;
  auto* enumerate_cmd = app.add_subcommand("enumerate", "Enumerate the poset of classes in a window");
  enumerate_cmd->add_option("n", enum_args.n, "Rows")->required();
  enumerate_cmd->add_option("m", enum_args.m, "Left columns")->required();
  enumerate_cmd->add_option("k", enum_args.k, "Variables")->required();
  enumerate_cmd->add_option("--subposet-loc", enum_args.anchor, "Keep the classes localizing to this matrix");
  enumerate_cmd->add_option("--out", enum_args.out, "Write the poset as JSON");
  enumerate_cmd->add_option("--dot", enum_args.dot, "Write the Hasse diagram as DOT");
  enumerate_cmd->add_option("--checkpoint", enum_args.checkpoint,
                            "Checkpoint directory (default: $MCLEX_CHECKPOINT_DIR)");
  enumerate_cmd->add_option("--workers", enum_args.workers, "Worker threads");
  enumerate_cmd->add_flag("--no-order", enum_args.no_order, "Skip the inclusion order");
  enumerate_cmd->add_flag("--no-groups", enum_args.no_groups, "Skip localization groups");
  enumerate_cmd->add_flag("--list", enum_args.list, "Print the canonical matrices");
  enumerate_cmd->add_flag("--verbose", enum_args.verbose, "Progress on stderr");
  enumerate_cmd->callback([&] { action = [&] { return run_enumerate(enum_args); }; });

  std::string poset_in, poset_out, poset_dot;
  auto* poset_cmd = app.add_subcommand("poset", "Reload a poset JSON file and re-emit it");
  poset_cmd->add_option("file", poset_in)->required();
  poset_cmd->add_option("--out", poset_out, "Write the poset as JSON");
  poset_cmd->add_option("--dot", poset_dot, "Write the Hasse diagram as DOT");
  poset_cmd->callback([&] {
    action = [&] {
      const PosetGraph g = poset_from_json(read_file(poset_in));
      if (!poset_out.empty()) write_file(poset_out, to_json(g));
      if (!poset_dot.empty()) write_file(poset_dot, to_dot(g));
      std::cout << "classes: " << g.classes.size() << "\n";
      return kYes;
    };
  });

  std::string tableau_path;
  auto* check_cmd = app.add_subcommand("check-tableau", "Replay tableau certificates");
  check_cmd->add_option("file", tableau_path)->required();
  check_cmd->callback([&] { action = [&] { return run_check_tableau(tableau_path); }; });

  std::string level = "fast";
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Run the brute-force equivalence battery");
  oracle_cmd->add_option("--level", level)->check(CLI::IsMember({"fast", "full"}));
  oracle_cmd->callback([&] { action = [&] { return run_oracle_check(level); }; });

  auto* maltsev_cmd = app.add_subcommand("maltsev-condition", "Print the term equations of a matrix");
  maltsev_cmd->add_option("matrix", matrix_arg)->required();
  maltsev_cmd->callback([&] {
    action = [&] {
      std::cout << maltsev_condition(load_matrix(matrix_arg)) << "\n";
      return kYes;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kYes : kUsage;
  }
  try {
    status = action();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CheckpointError& e) {
    std::cerr << "error: refusing to resume: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return status;
}
