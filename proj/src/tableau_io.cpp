#include "mclex/tableau_io.hpp"

#include <stdexcept>

#include <json.hpp>

namespace mclex {

namespace {

using nlohmann::ordered_json;

ordered_json entries_json(std::span<const Entry> entries) {
  auto arr = ordered_json::array();
  for (Entry e : entries) arr.push_back(is_star(e) ? ordered_json("*") : ordered_json(static_cast<unsigned>(e)));
  return arr;
}

std::vector<Entry> entries_from(const nlohmann::json& arr) {
  std::vector<Entry> out;
  for (const auto& v : arr) {
    if (v.is_string() && v.get<std::string>() == "*") {
      out.push_back(kStar);
    } else {
      const auto x = v.get<unsigned>();
      if (x == 0 || x > kMaxVariable) throw std::invalid_argument("tableau: variable index out of range");
      out.push_back(static_cast<Entry>(x));
    }
  }
  return out;
}

ordered_json proof_json(const TableauProof& p) {
  ordered_json j;
  j["goal"] = matrix_text(p.goal);
  auto hyps = ordered_json::array();
  for (const auto& h : p.hypotheses) hyps.push_back(matrix_text(h));
  j["hypotheses"] = std::move(hyps);
  auto steps = ordered_json::array();
  for (const auto& s : p.steps) {
    ordered_json step;
    step["added"] = entries_json(s.added);
    auto wit = ordered_json::array();
    for (const auto& w : s.witnesses)
      wit.push_back({{"matrix", w.matrix}, {"row", w.row}, {"map", entries_json(w.map)}});
    step["witnesses"] = std::move(wit);
    auto consumed = ordered_json::array();
    for (const auto& c : s.consumed) consumed.push_back(entries_json(c));
    step["consumed"] = std::move(consumed);
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  j["verdict"] = p.verdict;
  return j;
}

TableauProof proof_from(const nlohmann::json& j) {
  TableauProof p{parse_matrix(j.at("goal").get<std::string>()), {}, {}, j.at("verdict").get<bool>()};
  for (const auto& h : j.at("hypotheses")) p.hypotheses.push_back(parse_matrix(h.get<std::string>()));
  for (const auto& s : j.at("steps")) {
    TableauStep step;
    step.added = entries_from(s.at("added"));
    for (const auto& w : s.at("witnesses"))
      step.witnesses.push_back({w.at("matrix").get<std::size_t>(), w.at("row").get<std::size_t>(),
                                entries_from(w.at("map"))});
    for (const auto& c : s.at("consumed")) step.consumed.push_back(entries_from(c));
    p.steps.push_back(std::move(step));
  }
  return p;
}

}  // namespace

std::string matrix_text(const ExtendedMatrix& m) {
  if (m.vars() == m.max_var()) return m.to_string();
  return "#nmk " + std::to_string(m.rows()) + " " + std::to_string(m.left_cols()) + " " +
         std::to_string(m.vars()) + "\n" + m.to_string();
}

std::string tableau_to_json(std::span<const TableauProof> proofs) {
  if (proofs.size() == 1) return proof_json(proofs[0]).dump(2) + "\n";
  auto arr = ordered_json::array();
  for (const auto& p : proofs) arr.push_back(proof_json(p));
  return arr.dump(2) + "\n";
}

std::vector<TableauProof> tableau_from_json(std::string_view text) {
  std::vector<TableauProof> out;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.is_array()) {
      for (const auto& j : doc) out.push_back(proof_from(j));
    } else {
      out.push_back(proof_from(doc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("tableau: malformed JSON: ") + e.what());
  }
  return out;
}

}  // namespace mclex
