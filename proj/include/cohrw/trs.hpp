#pragma once

// Extended term rewriting systems: rules, steps in bicontexts, coherence
// cells between parallel paths, matching/unification, critical pairs, linear
// interpretations, hom-wise ARS instantiation and coherent confluence.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ars.hpp"
#include "term.hpp"

namespace cohrw {

struct TrsRule {
  std::string id;
  int arity = 0;
  Term lhs, rhs;
};

// A rewriting step: rule in a bicontext. With the step at ambient arity n,
// the context has arity n and the substitution maps n -> rule arity.
struct TermRewriteStep {
  int rule = -1;
  Context ctx;
  Substitution subst;
  bool forward = true;
};

struct TermZigZag {
  Term src;
  std::vector<TermRewriteStep> steps;
};

struct TermCoherenceCell {
  std::string id;
  TermZigZag source;
  TermZigZag target;
};

struct LinearInterpretation {
  // Per symbol of arity k: [c0, c1, ..., ck] meaning c0 + sum ci * xi.
  std::map<std::string, std::vector<long>> coeffs;

  void check(const Signature& sig) const {
    for (const auto& s : sig.symbols) {
      auto it = coeffs.find(s.name);
      if (it == coeffs.end())
        throw ContractError("interpretation missing symbol " + s.name);
      if (static_cast<int>(it->second.size()) != s.arity + 1)
        throw ContractError("interpretation arity mismatch for " + s.name);
      if (it->second[0] < 0) throw ContractError("negative constant for " + s.name);
      for (size_t i = 1; i < it->second.size(); ++i)
        if (it->second[i] < 1)
          throw ContractError("coefficient below 1 for " + s.name);
    }
  }
};

struct Trs2 {
  Signature sig;
  std::vector<TrsRule> rules;
  std::vector<TermCoherenceCell> cells;
  std::map<std::string, std::vector<int>> subsets;
  std::optional<LinearInterpretation> interp;
  std::vector<std::string> transcript;

  std::optional<int> find_rule(const std::string& id) const {
    for (size_t i = 0; i < rules.size(); ++i)
      if (rules[i].id == id) return static_cast<int>(i);
    return std::nullopt;
  }
  std::optional<int> find_cell(const std::string& id) const {
    for (size_t i = 0; i < cells.size(); ++i)
      if (cells[i].id == id) return static_cast<int>(i);
    return std::nullopt;
  }

  std::vector<int> subset_or_all(const std::string& name) const {
    if (name.empty() || name == "all") {
      std::vector<int> all(rules.size());
      for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
      return all;
    }
    auto it = subsets.find(name);
    if (it == subsets.end()) throw ContractError("unknown rule subset: " + name);
    return it->second;
  }
};

inline Term step_source(const Trs2& t, const TermRewriteStep& s) {
  const TrsRule& r = t.rules.at(s.rule);
  return plug(s.ctx, substitute(s.forward ? r.lhs : r.rhs, s.subst));
}

inline Term step_target(const Trs2& t, const TermRewriteStep& s) {
  const TrsRule& r = t.rules.at(s.rule);
  return plug(s.ctx, substitute(s.forward ? r.rhs : r.lhs, s.subst));
}

inline bool well_composed(const Trs2& t, const TermZigZag& z) {
  Term at = z.src;
  for (const TermRewriteStep& s : z.steps) {
    if (step_source(t, s) != at) return false;
    at = step_target(t, s);
  }
  return true;
}

inline Term zigzag_target(const Trs2& t, const TermZigZag& z) {
  return z.steps.empty() ? z.src : step_target(t, z.steps.back());
}

// ---------------------------------------------------------------------------
// Positions.

using Position = std::vector<int>;

inline std::string position_string(const Position& p) {
  std::string s = "[";
  for (size_t i = 0; i < p.size(); ++i) {
    if (i) s += ".";
    s += std::to_string(p[i] + 1);
  }
  return s + "]";
}

inline void positions_into(const Term& t, Position& cur, std::vector<Position>& out) {
  out.push_back(cur);
  for (size_t i = 0; i < t.args().size(); ++i) {
    cur.push_back(static_cast<int>(i));
    positions_into(t.args()[i], cur, out);
    cur.pop_back();
  }
}

// Preorder (leftmost-outermost) position listing.
inline std::vector<Position> positions(const Term& t) {
  std::vector<Position> out;
  Position cur;
  positions_into(t, cur, out);
  return out;
}

inline const Term& subterm_at(const Term& t, const Position& p) {
  const Term* at = &t;
  for (int i : p) at = &at->args().at(i);
  return *at;
}

inline Term replace_at(const Term& t, const Position& p, const Term& u, size_t depth = 0) {
  if (depth == p.size()) return u;
  std::vector<Term> args = t.args();
  args[p[depth]] = replace_at(args[p[depth]], p, u, depth + 1);
  return Term::app(t.arity(), t.symbol(), std::move(args));
}

inline Context context_at(const Term& t, const Position& p) {
  return Context{t.arity(), replace_at(t, p, Term::hole(t.arity()))};
}

inline Position hole_position(const Term& body) {
  if (body.is_hole()) return {};
  for (size_t i = 0; i < body.args().size(); ++i) {
    if (hole_occurrences(body.args()[i]) == 1) {
      Position p = hole_position(body.args()[i]);
      p.insert(p.begin(), static_cast<int>(i));
      return p;
    }
  }
  throw ContractError("hole_position: no hole");
}

// ---------------------------------------------------------------------------
// Matching and unification.

namespace detail {

inline bool match_into(const Term& pat, const Term& sub,
                       std::vector<std::optional<Term>>& bind) {
  if (pat.is_var()) {
    auto& slot = bind[pat.var_index() - 1];
    if (slot) return *slot == sub;  // non-linear patterns: equality required
    slot = sub;
    return true;
  }
  if (!sub.is_app() || pat.symbol() != sub.symbol()) return false;
  for (size_t i = 0; i < pat.args().size(); ++i)
    if (!match_into(pat.args()[i], sub.args()[i], bind)) return false;
  return true;
}

}  // namespace detail

// match(pattern of arity r, subject of arity n) -> f : n -> r with
// pattern[f] = subject. Every pattern variable must be bound.
inline std::optional<Substitution> match(const Term& pattern, const Term& subject) {
  std::vector<std::optional<Term>> bind(pattern.arity());
  if (!detail::match_into(pattern, subject, bind)) return std::nullopt;
  Substitution f;
  f.source_arity = subject.arity();
  for (auto& b : bind) {
    if (!b) return std::nullopt;  // unbound pattern variable
    f.components.push_back(*b);
  }
  return f;
}

namespace detail {

inline const Term& walk(const Term& t, const std::vector<std::optional<Term>>& bind) {
  const Term* at = &t;
  while (at->is_var() && bind[at->var_index() - 1]) at = &*bind[at->var_index() - 1];
  return *at;
}

inline bool occurs(int var, const Term& t, const std::vector<std::optional<Term>>& bind) {
  const Term& w = walk(t, bind);
  if (w.is_var()) return w.var_index() == var;
  for (const Term& a : w.args())
    if (occurs(var, a, bind)) return true;
  return false;
}

inline bool unify_into(const Term& t, const Term& u, std::vector<std::optional<Term>>& bind) {
  const Term& a = walk(t, bind);
  const Term& b = walk(u, bind);
  if (a.is_var() && b.is_var() && a.var_index() == b.var_index()) return true;
  if (a.is_var()) {
    if (occurs(a.var_index(), b, bind)) return false;
    bind[a.var_index() - 1] = b;
    return true;
  }
  if (b.is_var()) {
    if (occurs(b.var_index(), a, bind)) return false;
    bind[b.var_index() - 1] = a;
    return true;
  }
  if (a.symbol() != b.symbol() || a.args().size() != b.args().size()) return false;
  for (size_t i = 0; i < a.args().size(); ++i)
    if (!unify_into(a.args()[i], b.args()[i], bind)) return false;
  return true;
}

inline Term resolve(const Term& t, const std::vector<std::optional<Term>>& bind) {
  const Term& w = walk(t, bind);
  if (w.is_var()) return w;
  std::vector<Term> args;
  args.reserve(w.args().size());
  for (const Term& a : w.args()) args.push_back(resolve(a, bind));
  return Term::app(w.arity(), w.symbol(), std::move(args));
}

}  // namespace detail

// Most general unifier over a shared variable space: both terms are read at
// the ambient arity max(arity t, arity u), and the result is an idempotent
// substitution N -> N.
inline std::optional<Substitution> unify(const Term& t, const Term& u) {
  int n = std::max(t.arity(), u.arity());
  Term tt = t.with_arity(n);
  Term uu = u.with_arity(n);
  std::vector<std::optional<Term>> bind(n);
  if (!detail::unify_into(tt, uu, bind)) return std::nullopt;
  Substitution f;
  f.source_arity = n;
  for (int i = 1; i <= n; ++i)
    f.components.push_back(detail::resolve(Term::variable(n, i), bind));
  return f;
}

// Rename variables to 1..k in order of first (left-to-right) occurrence.
// Returns the canonical term; `image` optionally receives old -> new indices.
inline Term canonical_renaming(const Term& t, std::vector<int>* image = nullptr) {
  std::vector<int> occ = vars(t);
  std::vector<int> map(t.arity() + 1, 0);
  int next = 0;
  for (int v : occ)
    if (!map[v]) map[v] = ++next;
  Substitution f;
  f.source_arity = next;
  // Variables absent from t get an inert placeholder; substitution never
  // selects those components.
  for (int i = 1; i <= t.arity(); ++i)
    f.components.push_back(map[i] ? Term::variable(next, map[i]) : Term::hole(next));
  if (image) *image = map;
  return substitute(t, f);
}

// ---------------------------------------------------------------------------
// Redexes.

inline std::vector<TermRewriteStep> redexes(const Trs2& trs, const Term& t,
                                            const std::vector<int>& rule_indices) {
  std::vector<TermRewriteStep> out;
  for (const Position& p : positions(t)) {
    const Term& sub = subterm_at(t, p);
    for (int r : rule_indices) {
      auto f = match(trs.rules[r].lhs, sub);
      if (f) out.push_back({r, context_at(t, p), *f, true});
    }
  }
  return out;
}

inline std::vector<TermRewriteStep> redexes(const Trs2& trs, const Term& t) {
  std::vector<int> all(trs.rules.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return redexes(trs, t, all);
}

namespace detail {

// First redex in leftmost-innermost order (postorder positions, least rule
// index at each position).
inline std::optional<TermRewriteStep> first_innermost_redex(const Trs2& trs, const Term& t,
                                                            const std::vector<int>& rules,
                                                            Position& cur) {
  for (size_t i = 0; i < t.args().size(); ++i) {
    cur.push_back(static_cast<int>(i));
    auto s = first_innermost_redex(trs, t.args()[i], rules, cur);
    if (s) return s;
    cur.pop_back();
  }
  for (int r : rules) {
    auto f = match(trs.rules[r].lhs, t);
    if (f) return TermRewriteStep{r, Context{}, *f, true};  // ctx filled by caller
  }
  return std::nullopt;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear interpretations and termination.

// Linear form of a term: [c0, c1..cn] for ambient arity n.
inline std::vector<long> linear_form(const Term& t, const LinearInterpretation& I) {
  std::vector<long> out(t.arity() + 1, 0);
  if (t.is_var()) {
    out[t.var_index()] = 1;
    return out;
  }
  auto it = I.coeffs.find(t.symbol());
  if (it == I.coeffs.end()) throw ContractError("interpretation missing symbol " + t.symbol());
  const std::vector<long>& c = it->second;
  out[0] = c[0];
  for (size_t i = 0; i < t.args().size(); ++i) {
    std::vector<long> sub = linear_form(t.args()[i], I);
    for (size_t j = 0; j < out.size(); ++j) out[j] += c[i + 1] * sub[j];
  }
  return out;
}

struct TerminationReport {
  struct Entry {
    int rule;
    std::vector<long> lhs_form, rhs_form, margin;
    bool decreasing;
  };
  std::vector<Entry> entries;
  bool decreasing = true;
};

inline TerminationReport check_termination_linear(const Trs2& trs,
                                                  const std::vector<int>& rule_indices,
                                                  const LinearInterpretation& I) {
  I.check(trs.sig);
  TerminationReport rep;
  for (int r : rule_indices) {
    TerminationReport::Entry e;
    e.rule = r;
    e.lhs_form = linear_form(trs.rules[r].lhs, I);
    e.rhs_form = linear_form(trs.rules[r].rhs, I);
    e.margin.resize(e.lhs_form.size());
    long at_ones = 0;
    bool coeffs_ok = true;
    for (size_t i = 0; i < e.margin.size(); ++i) {
      e.margin[i] = e.lhs_form[i] - e.rhs_form[i];
      at_ones += e.margin[i];
      if (i >= 1 && e.margin[i] < 0) coeffs_ok = false;
    }
    e.decreasing = coeffs_ok && at_ones > 0;
    if (!e.decreasing) rep.decreasing = false;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Normalization (leftmost-innermost, fixed rule order).

inline std::pair<Term, std::vector<TermRewriteStep>> normalize_w(const Trs2& trs, const Term& t,
                                                                 const std::vector<int>& w,
                                                                 long step_bound = 100000) {
  Term at = t;
  std::vector<TermRewriteStep> path;
  long steps = 0;
  for (;;) {
    Position cur;
    auto s = detail::first_innermost_redex(trs, at, w, cur);
    if (!s) break;
    if (++steps > step_bound) throw BoundExhausted("normalize_w: step bound exhausted");
    s->ctx = context_at(at, cur);
    s->subst.source_arity = at.arity();
    at = step_target(trs, *s);
    path.push_back(std::move(*s));
  }
  return {at, path};
}

// ---------------------------------------------------------------------------
// Critical pairs.

struct CriticalPair {
  int rule1 = -1, rule2 = -1;
  Position pos;         // in lhs(rule1), non-variable
  Term source;          // superposed source, canonically renamed
  TermRewriteStep left;   // rule1 at the root
  TermRewriteStep right;  // rule2 at pos
};

inline std::vector<CriticalPair> critical_pairs(const Trs2& trs) {
  std::vector<CriticalPair> out;
  std::set<std::string> seen;
  for (size_t i = 0; i < trs.rules.size(); ++i) {
    int r1 = trs.rules[i].arity;
    for (size_t j = 0; j < trs.rules.size(); ++j) {
      int r2 = trs.rules[j].arity;
      int n = r1 + r2;
      // Shift rule j's variables above rule i's.
      Substitution shift;
      shift.source_arity = n;
      for (int v = 1; v <= r2; ++v) shift.components.push_back(Term::variable(n, r1 + v));
      Term lhs2 = substitute(trs.rules[j].lhs.with_arity(r2), shift);

      for (const Position& p : positions(trs.rules[i].lhs)) {
        const Term& sub = subterm_at(trs.rules[i].lhs, p);
        if (sub.is_var()) continue;
        if (i == j && p.empty()) continue;  // root self-overlap is a pure renaming
        auto mgu = unify(sub.with_arity(n), lhs2);
        if (!mgu) continue;

        Term source = substitute(trs.rules[i].lhs.with_arity(n), *mgu);
        std::vector<int> image;
        Term canon = canonical_renaming(source, &image);
        int k = canon.arity();
        // Rename the mgu's components into the canonical variable space.
        Substitution rename;
        rename.source_arity = k;
        for (int v = 1; v <= n; ++v)
          rename.components.push_back(image[v] ? Term::variable(k, image[v]) : Term::hole(k));
        auto inst = [&](const Term& x) { return substitute(substitute(x, *mgu), rename); };

        CriticalPair cp;
        cp.rule1 = static_cast<int>(i);
        cp.rule2 = static_cast<int>(j);
        cp.pos = p;
        cp.source = canon;
        // Left step: rule i at the root.
        Substitution fl;
        fl.source_arity = k;
        for (int v = 1; v <= r1; ++v) fl.components.push_back(inst(Term::variable(n, v)));
        cp.left = {static_cast<int>(i), Context::identity(k), fl, true};
        // Right step: rule j at p.
        Substitution fr;
        fr.source_arity = k;
        for (int v = 1; v <= r2; ++v) fr.components.push_back(inst(Term::variable(n, r1 + v)));
        cp.right = {static_cast<int>(j), context_at(canon, p), fr, true};

        // Duplicate quotient: the unordered pair of (rule at position)
        // residuals from the canonical source.
        std::string a = trs.rules[i].id + "@" + position_string({}) + "->" +
                        print_term(step_target(trs, cp.left));
        std::string b = trs.rules[j].id + "@" + position_string(p) + "->" +
                        print_term(step_target(trs, cp.right));
        std::string key = print_term(canon) + "|" + (a < b ? a + "|" + b : b + "|" + a);
        if (seen.insert(key).second) out.push_back(std::move(cp));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hom-wise ARS instantiation.

struct HomArs {
  Ars2 ars;
  std::vector<Term> object_term;              // per ARS object
  std::vector<TermRewriteStep> rule_step;     // per ARS rule
  bool truncated = false;

  std::optional<int> object_of(const Term& t) const {
    auto it = index_.find(print_term(t));
    return it == index_.end() ? std::nullopt : std::optional<int>(it->second);
  }

  std::unordered_map<std::string, int> index_;
};

namespace detail {

// All terms of the given arity with node count <= size_bound, by size then
// construction order.
inline std::vector<Term> enumerate_terms(const Signature& sig, int n, int size_bound) {
  std::vector<std::vector<Term>> by_size(size_bound + 1);
  if (size_bound >= 1) {
    for (int v = 1; v <= n; ++v) by_size[1].push_back(Term::variable(n, v));
    for (const auto& s : sig.symbols)
      if (s.arity == 0) by_size[1].push_back(Term::app(n, s.name, {}));
  }
  for (int sz = 2; sz <= size_bound; ++sz) {
    for (const auto& s : sig.symbols) {
      if (s.arity == 0) continue;
      // Distribute sz - 1 nodes over s.arity children, each >= 1.
      std::vector<std::vector<Term>> complete;
      struct Frame {
        std::vector<Term> args;
        int remaining;
      };
      std::vector<Frame> work{{{}, sz - 1}};
      while (!work.empty()) {
        Frame f = std::move(work.back());
        work.pop_back();
        int left = s.arity - static_cast<int>(f.args.size());
        if (left == 0) {
          if (f.remaining == 0) complete.push_back(std::move(f.args));
          continue;
        }
        for (int c = 1; c + (left - 1) <= f.remaining; ++c) {
          for (const Term& child : by_size[c]) {
            Frame g = f;
            g.args.push_back(child);
            g.remaining = f.remaining - c;
            work.push_back(std::move(g));
          }
        }
      }
      // Restore a deterministic order.
      std::vector<Term> built;
      for (auto& args : complete) built.push_back(Term::app(n, s.name, args));
      std::sort(built.begin(), built.end(), [](const Term& a, const Term& b) {
        return print_term(a) < print_term(b);
      });
      for (auto& t : built) by_size[sz].push_back(std::move(t));
    }
  }
  std::vector<Term> out;
  for (auto& bucket : by_size)
    for (auto& t : bucket) out.push_back(std::move(t));
  return out;
}

inline std::string hom_rule_key(const Trs2& trs, const TermRewriteStep& s) {
  return trs.rules[s.rule].id + "@" + position_string(hole_position(s.ctx.body)) + ":" +
         print_term(plug(s.ctx, substitute(trs.rules[s.rule].lhs, s.subst)));
}

// Instantiate a term-level step through a bicontext.
inline TermRewriteStep instantiate_step(const TermRewriteStep& s, const Bicontext& B) {
  Bicontext inner{s.ctx, s.subst};
  Bicontext comp = compose_bicontext(B, inner);
  return {s.rule, comp.context, comp.subst, s.forward};
}

inline HomArs hom_ars_from_objects(const Trs2& trs, std::vector<Term> objects, int size_bound) {
  HomArs h;
  for (size_t i = 0; i < objects.size(); ++i) {
    h.index_[print_term(objects[i])] = static_cast<int>(i);
    h.ars.add_object(print_term(objects[i]));
  }
  h.object_term = std::move(objects);

  std::unordered_map<std::string, int> rule_index;
  for (size_t i = 0; i < h.object_term.size(); ++i) {
    for (const TermRewriteStep& s : redexes(trs, h.object_term[i])) {
      Term tgt = step_target(trs, s);
      auto oj = h.object_of(tgt);
      if (!oj) {
        if (tgt.size() > size_bound) h.truncated = true;
        continue;
      }
      std::string key = hom_rule_key(trs, s);
      if (rule_index.count(key)) continue;
      rule_index[key] = h.ars.add_rule(key, static_cast<int>(i), *oj);
      h.rule_step.push_back(s);
    }
  }

  // Cells: every bicontext instance of every cell whose boundary steps are
  // all retained.
  for (const TermCoherenceCell& cell : trs.cells) {
    for (size_t i = 0; i < h.object_term.size(); ++i) {
      const Term& t = h.object_term[i];
      for (const Position& p : positions(t)) {
        auto f = match(cell.source.src, subterm_at(t, p));
        if (!f) continue;
        Bicontext B{context_at(t, p), *f};
        auto lift_boundary = [&](const TermZigZag& z, ZigZag& out) -> bool {
          Term at = bicontext_apply(B, z.src);
          auto oi = h.object_of(at);
          if (!oi) return false;
          out.src = *oi;
          out.steps.clear();
          for (const TermRewriteStep& s : z.steps) {
            TermRewriteStep inst = instantiate_step(s, B);
            TermRewriteStep fwd = inst;
            fwd.forward = true;
            auto it = rule_index.find(hom_rule_key(trs, fwd));
            if (it == rule_index.end()) return false;
            out.steps.push_back({it->second, inst.forward});
          }
          return true;
        };
        ZigZag zs, zt;
        if (lift_boundary(cell.source, zs) && lift_boundary(cell.target, zt))
          h.ars.add_cell(cell.id + "@" + position_string(p) + ":" + print_term(t), zs, zt);
      }
    }
  }
  return h;
}

}  // namespace detail

inline HomArs hom_ars(const Trs2& trs, int n, int size_bound) {
  if (size_bound < 1) throw ContractError("hom_ars: size bound must be >= 1");
  return detail::hom_ars_from_objects(trs, detail::enumerate_terms(trs.sig, n, size_bound),
                                      size_bound);
}

// Hom truncation over the forward closure of the seed terms (all rules),
// capped by size and object count.
inline HomArs hom_ars_reachable(const Trs2& trs, const std::vector<Term>& seeds, int size_bound,
                                long object_bound = 100000) {
  std::vector<Term> objects;
  std::unordered_map<std::string, int> seen;
  std::deque<Term> frontier;
  bool truncated = false;
  for (const Term& s : seeds) {
    if (seen.count(print_term(s))) continue;
    seen[print_term(s)] = 1;
    objects.push_back(s);
    frontier.push_back(s);
  }
  while (!frontier.empty() && static_cast<long>(objects.size()) < object_bound) {
    Term t = frontier.front();
    frontier.pop_front();
    for (const TermRewriteStep& s : redexes(trs, t)) {
      Term u = step_target(trs, s);
      if (u.size() > size_bound) {
        truncated = true;
        continue;
      }
      if (seen.count(print_term(u))) continue;
      seen[print_term(u)] = 1;
      objects.push_back(u);
      frontier.push_back(u);
    }
  }
  HomArs h = detail::hom_ars_from_objects(trs, std::move(objects), size_bound);
  h.truncated = h.truncated || truncated;
  return h;
}

// ---------------------------------------------------------------------------
// Coherent local confluence from critical branchings.

struct CriticalPairReport {
  struct Entry {
    size_t pair = 0;
    std::string source;
    std::string left_label, right_label;
    bool in_w = true;
    bool joined = false;
    bool filled = false;
    std::vector<std::string> cells_used;
  };
  std::vector<Entry> entries;
  bool all_filled = true;
  bool termination_certified = false;
  std::string verdict;
};

inline CriticalPairReport check_local_confluence_coherent(const Trs2& trs,
                                                          const std::vector<int>& w,
                                                          long bound = 10000,
                                                          int size_slack = 4) {
  std::set<int> wset(w.begin(), w.end());
  CriticalPairReport rep;
  auto pairs = critical_pairs(trs);
  for (size_t pi = 0; pi < pairs.size(); ++pi) {
    const CriticalPair& cp = pairs[pi];
    CriticalPairReport::Entry e;
    e.pair = pi;
    e.source = print_term(cp.source);
    e.left_label = trs.rules[cp.rule1].id + "@" + position_string({});
    e.right_label = trs.rules[cp.rule2].id + "@" + position_string(cp.pos);
    if (!wset.count(cp.rule1) || !wset.count(cp.rule2)) {
      e.in_w = false;
      rep.entries.push_back(std::move(e));
      continue;
    }
    HomArs h = hom_ars_reachable(trs, {cp.source}, cp.source.size() + size_slack);
    std::vector<int> wrules;
    for (size_t r = 0; r < h.rule_step.size(); ++r)
      if (wset.count(h.rule_step[r].rule)) wrules.push_back(static_cast<int>(r));
    RuleSubset wsub = RuleSubset::of(h.ars, wrules);
    auto left = h.ars.find_rule(detail::hom_rule_key(trs, cp.left));
    auto right = h.ars.find_rule(detail::hom_rule_key(trs, cp.right));
    if (!left || !right) throw ContractError("critical pair step missing from hom truncation");
    BranchingRecord br = check_branching(h.ars, wsub, *left, *right, bound);
    e.joined = br.joinable;
    e.filled = br.filled;
    std::set<std::string> used;
    for (const CohMove& m : br.filling.witness) {
      std::string id = h.ars.cells[m.cell].id;
      used.insert(id.substr(0, id.find('@')));
    }
    e.cells_used.assign(used.begin(), used.end());
    if (!e.filled) rep.all_filled = false;
    rep.entries.push_back(std::move(e));
  }
  if (trs.interp) {
    TerminationReport t = check_termination_linear(trs, w, *trs.interp);
    rep.termination_certified = t.decreasing;
  }
  if (rep.all_filled && rep.termination_certified)
    rep.verdict = "W-terminating and locally W-confluent with fillings, hence W-coherent";
  else if (rep.all_filled)
    rep.verdict = "locally W-confluent with fillings";
  else
    rep.verdict = "some critical W-branching unproven within bound";
  return rep;
}

// ---------------------------------------------------------------------------
// Tietze transformations at term level.

inline Trs2 tietze_trs_add_rule(const Trs2& trs, const TermZigZag& p, const std::string& rule_id,
                                const std::string& cell_id) {
  if (!well_composed(trs, p)) throw ContractError("tietze add-rule: ill-composed path");
  Trs2 out = trs;
  Term src = p.src;
  Term tgt = zigzag_target(trs, p);
  if (src.arity() != tgt.arity()) throw ContractError("tietze add-rule: arity mismatch");
  out.rules.push_back({rule_id, src.arity(), src, tgt});
  TermZigZag lhs;
  lhs.src = src;
  lhs.steps.push_back({static_cast<int>(out.rules.size()) - 1, Context::identity(src.arity()),
                       Substitution::identity(src.arity()), true});
  out.cells.push_back({cell_id, lhs, p});
  out.transcript.push_back("add-rule " + rule_id + " with defining cell " + cell_id);
  return out;
}

// Provability is checked by bounded search on the reachable hom truncation.
inline Trs2 tietze_trs_add_cell(const Trs2& trs, const TermZigZag& p, const TermZigZag& q,
                                const std::string& cell_id, long bound = 10000,
                                int size_slack = 4) {
  if (!well_composed(trs, p) || !well_composed(trs, q))
    throw ContractError("tietze add-cell: ill-composed zig-zag");
  if (!(p.src == q.src) || !(zigzag_target(trs, p) == zigzag_target(trs, q)))
    throw ContractError("tietze add-cell: not parallel");
  int sz = p.src.size();
  for (const TermRewriteStep& s : p.steps) sz = std::max(sz, step_target(trs, s).size());
  for (const TermRewriteStep& s : q.steps) sz = std::max(sz, step_target(trs, s).size());
  HomArs h = hom_ars_reachable(trs, {p.src, zigzag_target(trs, p)}, sz + size_slack);
  auto lift = [&](const TermZigZag& z) {
    ZigZag out;
    auto oi = h.object_of(z.src);
    if (!oi) throw ContractError("tietze add-cell: endpoint outside truncation");
    out.src = *oi;
    for (const TermRewriteStep& s : z.steps) {
      TermRewriteStep fwd = s;
      fwd.forward = true;
      auto r = h.ars.find_rule(detail::hom_rule_key(trs, fwd));
      if (!r) throw ContractError("tietze add-cell: step outside truncation");
      out.steps.push_back({*r, s.forward});
    }
    return out;
  };
  CohSearchOutcome proof = cohto_equivalent(h.ars, lift(p), lift(q), bound);
  if (!proof.proven) throw ContractError("tietze add-cell: equivalence not proven within bound");
  Trs2 out = trs;
  out.cells.push_back({cell_id, p, q});
  out.transcript.push_back("add-cell " + cell_id + " (proven, explored " +
                           std::to_string(proof.explored) + ")");
  return out;
}

// Remove a rule via a cell whose source contains exactly one forward step of
// that rule, at the identity bicontext; every other occurrence of the rule is
// replaced by the induced path p1^- . q . p2^-.
inline Trs2 tietze_trs_remove_rule(const Trs2& trs, int rule, int cell) {
  const TermCoherenceCell& c = trs.cells.at(cell);
  int count = 0;
  size_t at = 0;
  for (size_t i = 0; i < c.source.steps.size(); ++i)
    if (c.source.steps[i].rule == rule) {
      ++count;
      at = i;
    }
  for (const TermRewriteStep& s : c.target.steps)
    if (s.rule == rule) throw ContractError("tietze remove-rule: rule occurs in cell target");
  if (count != 1 || !c.source.steps[at].forward)
    throw ContractError("tietze remove-rule: rule must occur exactly once, forward, in cell source");
  const TermRewriteStep& occ = c.source.steps[at];
  int k = trs.rules[rule].arity;
  if (!(occ.ctx == Context::identity(occ.ctx.arity)) || !(occ.subst == Substitution::identity(k)))
    throw ContractError("tietze remove-rule: distinguished occurrence must be at the identity bicontext");

  // Replacement path for the bare rule: p1 reversed, q, p2 reversed.
  std::vector<TermRewriteStep> repl;
  for (size_t i = at; i-- > 0;) {
    TermRewriteStep s = c.source.steps[i];
    s.forward = !s.forward;
    repl.push_back(s);
  }
  for (const TermRewriteStep& s : c.target.steps) repl.push_back(s);
  for (size_t i = c.source.steps.size(); i-- > at + 1;) {
    TermRewriteStep s = c.source.steps[i];
    s.forward = !s.forward;
    repl.push_back(s);
  }
  for (const TermRewriteStep& s : repl)
    if (s.rule == rule) throw ContractError("tietze remove-rule: replacement still uses the rule");

  Trs2 out;
  out.sig = trs.sig;
  out.interp = trs.interp;
  out.transcript = trs.transcript;
  std::vector<int> rule_map(trs.rules.size(), -1);
  for (size_t r = 0; r < trs.rules.size(); ++r)
    if (static_cast<int>(r) != rule) {
      rule_map[r] = static_cast<int>(out.rules.size());
      out.rules.push_back(trs.rules[r]);
    }
  for (const auto& [name, members] : trs.subsets) {
    std::vector<int> mapped;
    for (int m : members)
      if (rule_map[m] >= 0) mapped.push_back(rule_map[m]);
    out.subsets[name] = mapped;
  }

  auto rewrite = [&](const TermZigZag& z) {
    TermZigZag nz;
    nz.src = z.src;
    for (const TermRewriteStep& s : z.steps) {
      if (s.rule != rule) {
        TermRewriteStep m = s;
        m.rule = rule_map[s.rule];
        nz.steps.push_back(m);
        continue;
      }
      Bicontext B{s.ctx, s.subst};
      std::vector<TermRewriteStep> seg;
      for (const TermRewriteStep& r : repl) seg.push_back(detail::instantiate_step(r, B));
      if (!s.forward) {
        std::reverse(seg.begin(), seg.end());
        for (auto& r : seg) r.forward = !r.forward;
      }
      for (auto& r : seg) {
        r.rule = rule_map[r.rule];
        nz.steps.push_back(r);
      }
    }
    return nz;
  };
  for (size_t i = 0; i < trs.cells.size(); ++i) {
    if (static_cast<int>(i) == cell) continue;
    out.cells.push_back({trs.cells[i].id, rewrite(trs.cells[i].source), rewrite(trs.cells[i].target)});
  }
  out.transcript.push_back("remove-rule " + trs.rules[rule].id + " via cell " + c.id);
  return out;
}

}  // namespace cohrw
