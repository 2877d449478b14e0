#pragma once

// Theory-file syntax:
//
//   signature
//     m : 2
//     e : 0
//   rules
//     alpha : m(m(x1,x2),x3) => m(x1,m(x2,x3))
//   coherence
//     C : m(rho(x1),x2) => alpha(x1,e,x2) ; m(x1,lambda(x2))
//     F : gamma(x1,x2) ; gamma(x2,x1) => id(m(x1,x2))
//   subset W = {alpha, lambda, rho}
//   interp
//     m = 2*x1 + x2 + 0
//     e = 1
//
// A coherence step is a term with exactly one rule-application node; the
// `^-` suffix marks a backward step; `id(term)` denotes the empty path.
// `#` starts a comment. Rule arity is the maximal variable index used.

#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "trs.hpp"

namespace cohrw {

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline int max_var_in_text(const std::string& s) {
  int best = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != 'x') continue;
    if (i > 0 && (std::isalnum(static_cast<unsigned char>(s[i - 1])) || s[i - 1] == '_'))
      continue;
    size_t j = i + 1;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i + 1) best = std::max(best, std::stoi(s.substr(i + 1, j - i - 1)));
  }
  return best;
}

inline bool contains_rule_symbol(const Term& t, const Trs2& trs) {
  if (t.is_app() && trs.find_rule(t.symbol())) return true;
  for (const Term& a : t.args())
    if (contains_rule_symbol(a, trs)) return true;
  return false;
}

// Locate the unique rule-application node; returns its position.
inline bool find_rule_node(const Term& t, const Trs2& trs, Position& cur, Position& found,
                           int& count) {
  if (t.is_app() && trs.find_rule(t.symbol())) {
    ++count;
    found = cur;
  }
  for (size_t i = 0; i < t.args().size(); ++i) {
    cur.push_back(static_cast<int>(i));
    find_rule_node(t.args()[i], trs, cur, found, count);
    cur.pop_back();
  }
  return count == 1;
}

}  // namespace detail

// Parse one coherence step like "m(x1,alpha(x2,x3,x4))" (optionally with a
// trailing "^-") at the given ambient arity, over the signature extended
// with one symbol per rule.
inline TermRewriteStep parse_step(const Trs2& trs, const Signature& ext, std::string text,
                                  int arity) {
  text = detail::trim(text);
  bool forward = true;
  if (text.size() >= 2 && text.substr(text.size() - 2) == "^-") {
    forward = false;
    text = detail::trim(text.substr(0, text.size() - 2));
  }
  Term t = parse_term(text, arity, ext);
  Position pos;
  Position cur;
  int count = 0;
  detail::find_rule_node(t, trs, cur, pos, count);
  if (count != 1)
    throw ContractError("step must contain exactly one rule application: " + text);
  const Term& node = subterm_at(t, pos);
  int rule = *trs.find_rule(node.symbol());
  for (const Term& a : node.args())
    if (detail::contains_rule_symbol(a, trs))
      throw ContractError("nested rule application in step: " + text);
  Context ctx = context_at(t, pos);
  if (detail::contains_rule_symbol(ctx.body, trs))
    throw ContractError("rule application outside the step node: " + text);
  Substitution f;
  f.source_arity = arity;
  f.components = node.args();
  return {rule, ctx, f, forward};
}

// Parse a path expression: "id(term)" or steps joined by ";".
inline TermZigZag parse_path(const Trs2& trs, const Signature& ext, const std::string& text,
                             int arity) {
  std::string s = detail::trim(text);
  if (s.rfind("id(", 0) == 0 && s.back() == ')') {
    TermZigZag z;
    z.src = parse_term(s.substr(3, s.size() - 4), arity, trs.sig);
    return z;
  }
  TermZigZag z;
  bool first = true;
  Term at;
  for (const std::string& part : detail::split(s, ';')) {
    TermRewriteStep step = parse_step(trs, ext, part, arity);
    if (first) {
      z.src = step_source(trs, step);
      at = z.src;
      first = false;
    }
    if (!(step_source(trs, step) == at))
      throw ContractError("steps do not compose at: " + detail::trim(part));
    at = step_target(trs, step);
    z.steps.push_back(std::move(step));
  }
  return z;
}

// The signature extended with one symbol per rule (for step parsing).
inline Signature extended_signature(const Trs2& trs) {
  Signature ext = trs.sig;
  for (const TrsRule& r : trs.rules) ext.add(r.id, r.arity);
  return ext;
}

// Infer the ambient arity of a path expression and parse it.
inline TermZigZag parse_path(const Trs2& trs, const std::string& text) {
  return parse_path(trs, extended_signature(trs), text, detail::max_var_in_text(text));
}

// Parse a linear expression like "2*x1 + x2 + 0" into [c0, c1..ck].
inline std::vector<long> parse_linear_expr(const std::string& text, int arity) {
  std::vector<long> out(arity + 1, 0);
  for (std::string part : detail::split(text, '+')) {
    part = detail::trim(part);
    if (part.empty()) throw ContractError("empty summand in interpretation");
    long coeff = 1;
    std::string var = part;
    auto star = part.find('*');
    if (star != std::string::npos) {
      coeff = std::stol(detail::trim(part.substr(0, star)));
      var = detail::trim(part.substr(star + 1));
    }
    if (var.size() >= 2 && var[0] == 'x') {
      int idx = std::stoi(var.substr(1));
      if (idx < 1 || idx > arity) throw ContractError("interpretation variable out of range: " + var);
      out[idx] += coeff;
    } else {
      out[0] += std::stol(var) * (star == std::string::npos ? 1 : coeff);
    }
  }
  return out;
}

inline Trs2 parse_theory(const std::string& text) {
  Trs2 trs;
  enum Section { None, Sig, Rules, Coherence, Interp } section = None;
  struct PendingCell {
    std::string id, lhs, rhs;
  };
  std::vector<PendingCell> pending_cells;
  std::vector<std::pair<std::string, std::string>> pending_interp;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto fail = [&](const std::string& msg) {
      throw ContractError("line " + std::to_string(lineno) + ": " + msg);
    };

    if (line == "signature") {
      section = Sig;
      continue;
    }
    if (line == "rules") {
      section = Rules;
      continue;
    }
    if (line == "coherence") {
      section = Coherence;
      continue;
    }
    if (line == "interp") {
      section = Interp;
      continue;
    }
    if (line.rfind("subset", 0) == 0) {
      auto eq = line.find('=');
      if (eq == std::string::npos) fail("malformed subset line");
      std::string name = detail::trim(line.substr(6, eq - 6));
      std::string body = detail::trim(line.substr(eq + 1));
      if (body.size() < 2 || body.front() != '{' || body.back() != '}')
        fail("subset body must be {...}");
      std::vector<int> members;
      for (std::string m : detail::split(body.substr(1, body.size() - 2), ',')) {
        m = detail::trim(m);
        if (m.empty()) continue;
        auto r = trs.find_rule(m);
        if (!r) fail("unknown rule in subset: " + m);
        members.push_back(*r);
      }
      trs.subsets[name] = members;
      continue;
    }

    switch (section) {
      case Sig: {
        auto colon = line.find(':');
        if (colon == std::string::npos) fail("expected 'name : arity'");
        trs.sig.add(detail::trim(line.substr(0, colon)),
                    std::stoi(detail::trim(line.substr(colon + 1))));
        break;
      }
      case Rules: {
        auto colon = line.find(':');
        auto arrow = line.find("=>");
        if (colon == std::string::npos || arrow == std::string::npos || arrow < colon)
          fail("expected 'name : lhs => rhs'");
        std::string id = detail::trim(line.substr(0, colon));
        std::string lhs = detail::trim(line.substr(colon + 1, arrow - colon - 1));
        std::string rhs = detail::trim(line.substr(arrow + 2));
        int arity = std::max(detail::max_var_in_text(lhs), detail::max_var_in_text(rhs));
        if (trs.find_rule(id)) fail("duplicate rule: " + id);
        trs.rules.push_back(
            {id, arity, parse_term(lhs, arity, trs.sig), parse_term(rhs, arity, trs.sig)});
        break;
      }
      case Coherence: {
        auto colon = line.find(':');
        auto arrow = line.find("=>");
        if (colon == std::string::npos || arrow == std::string::npos || arrow < colon)
          fail("expected 'name : steps => steps'");
        pending_cells.push_back({detail::trim(line.substr(0, colon)),
                                 detail::trim(line.substr(colon + 1, arrow - colon - 1)),
                                 detail::trim(line.substr(arrow + 2))});
        break;
      }
      case Interp: {
        auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'symbol = linear expression'");
        pending_interp.push_back(
            {detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1))});
        break;
      }
      case None:
        fail("content outside of any section");
    }
  }

  // Cells are resolved after all rules are known.
  Signature ext = extended_signature(trs);
  for (const auto& pc : pending_cells) {
    int arity = std::max(detail::max_var_in_text(pc.lhs), detail::max_var_in_text(pc.rhs));
    TermZigZag src = parse_path(trs, ext, pc.lhs, arity);
    TermZigZag tgt = parse_path(trs, ext, pc.rhs, arity);
    if (!(src.src == tgt.src) || !(zigzag_target(trs, src) == zigzag_target(trs, tgt)))
      throw ContractError("cell boundaries not parallel: " + pc.id);
    if (trs.find_cell(pc.id)) throw ContractError("duplicate cell: " + pc.id);
    trs.cells.push_back({pc.id, std::move(src), std::move(tgt)});
  }

  if (!pending_interp.empty()) {
    LinearInterpretation I;
    for (const auto& [sym, expr] : pending_interp) {
      auto s = trs.sig.find(sym);
      if (!s) throw ContractError("interpretation for unknown symbol: " + sym);
      I.coeffs[sym] = parse_linear_expr(expr, trs.sig.symbols[*s].arity);
    }
    I.check(trs.sig);
    trs.interp = I;
  }
  return trs;
}

}  // namespace cohrw
