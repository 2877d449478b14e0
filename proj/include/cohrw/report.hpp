#pragma once

// JSON report serialization and DOT export. Reports are deterministic for
// fixed inputs and bounds.

#include <json.hpp>

#include "smc.hpp"

namespace cohrw {

using nlohmann::json;

inline json zigzag_json(const Ars2& a, const ZigZag& z) {
  json steps = json::array();
  for (const SignedStep& s : z.steps)
    steps.push_back((s.forward ? "+" : "-") + a.rules[s.rule].id);
  return json{{"src", a.objects[z.src]}, {"tgt", a.objects[a.target_of(z)]}, {"steps", steps}};
}

inline json outcome_json(const Ars2& a, const CohSearchOutcome& o) {
  json j{{"proven", o.proven}, {"explored", o.explored}, {"bound", o.bound}};
  if (o.proven) {
    json w = json::array();
    for (const CohMove& m : o.witness)
      w.push_back(json{{"cell", a.cells[m.cell].id},
                       {"direction", m.source_to_target ? "source-to-target" : "target-to-source"},
                       {"reversed", m.reversed},
                       {"insertion", m.insertion},
                       {"pos", m.pos}});
    j["witness"] = w;
  }
  return j;
}

inline json confluence_json(const Ars2& a, const ConfluenceReport& r) {
  json entries = json::array();
  for (const BranchingRecord& b : r.branchings) {
    json e{{"source", a.objects[b.source]},
           {"left", a.rules[b.left_rule].id},
           {"right", a.rules[b.right_rule].id},
           {"joinable", b.joinable},
           {"filled", b.filled}};
    if (b.filled) e["filling"] = outcome_json(a, b.filling);
    entries.push_back(e);
  }
  return json{{"branchings", entries}, {"all_filled", r.all_filled()}};
}

inline json termination_json(const Trs2& trs, const TerminationReport& r) {
  auto form = [](const std::vector<long>& f) {
    json j = json::array();
    for (long c : f) j.push_back(c);
    return j;
  };
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back(json{{"rule", trs.rules[e.rule].id},
                           {"lhs_form", form(e.lhs_form)},
                           {"rhs_form", form(e.rhs_form)},
                           {"margin", form(e.margin)},
                           {"decreasing", e.decreasing}});
  return json{{"rules", entries}, {"decreasing", r.decreasing}};
}

inline json critical_pairs_json(const Trs2& trs, const std::vector<CriticalPair>& pairs) {
  json out = json::array();
  for (const CriticalPair& cp : pairs)
    out.push_back(json{{"source", print_term(cp.source)},
                       {"rule1", trs.rules[cp.rule1].id},
                       {"rule2", trs.rules[cp.rule2].id},
                       {"position", position_string(cp.pos)},
                       {"left_target", print_term(step_target(trs, cp.left))},
                       {"right_target", print_term(step_target(trs, cp.right))}});
  return out;
}

inline json local_confluence_json(const Trs2& trs, const CriticalPairReport& r) {
  (void)trs;
  json entries = json::array();
  for (const auto& e : r.entries) {
    json cells = json::array();
    for (const std::string& c : e.cells_used) cells.push_back(c);
    entries.push_back(json{{"pair", e.pair},
                           {"source", e.source},
                           {"left", e.left_label},
                           {"right", e.right_label},
                           {"in_subset", e.in_w},
                           {"joined", e.joined},
                           {"filled", e.filled},
                           {"cells_used", cells}});
  }
  return json{{"pairs", entries},
              {"all_filled", r.all_filled},
              {"termination_certified", r.termination_certified},
              {"verdict", r.verdict}};
}

inline json bijection_json(const ColorBijection& b) {
  json map = json::array();
  for (int i : b.map) map.push_back(i);
  json from = json::array(), to = json::array();
  for (int c : b.from.colors) from.push_back(c);
  for (int c : b.to.colors) to.push_back(c);
  return json{{"from_colors", from},
              {"to_colors", to},
              {"map", map},
              {"cycles", cycle_notation(b.map)}};
}

// DOT export of the W-step graph.
inline std::string to_dot(const Ars2& a, const RuleSubset& w) {
  std::string out = "digraph W {\n";
  for (size_t x = 0; x < a.objects.size(); ++x)
    out += "  n" + std::to_string(x) + " [label=\"" + a.objects[x] + "\"];\n";
  for (size_t r = 0; r < a.rules.size(); ++r)
    if (w.contains(static_cast<int>(r)))
      out += "  n" + std::to_string(a.rules[r].src) + " -> n" + std::to_string(a.rules[r].tgt) +
             " [label=\"" + a.rules[r].id + "\"];\n";
  return out + "}\n";
}

}  // namespace cohrw
