#pragma once

// Built-in (symmetric) monoidal theories, the explicit theory of color lists
// and color-preserving bijections, the underlying-permutation functor, the
// 2-cell equality decision procedure, and the pruned affine system.

#include <numeric>
#include <string>
#include <vector>

#include "dsl.hpp"

namespace cohrw {

// ---------------------------------------------------------------------------
// Built-in theories.

inline const char* kMonTheory = R"thy(
signature
  m : 2
  e : 0
rules
  alpha : m(m(x1,x2),x3) => m(x1,m(x2,x3))
  lambda : m(e,x1) => x1
  rho : m(x1,e) => x1
coherence
  A : m(alpha(x1,x2,x3),x4) ; alpha(x1,m(x2,x3),x4) ; m(x1,alpha(x2,x3,x4)) => alpha(m(x1,x2),x3,x4) ; alpha(x1,x2,m(x3,x4))
  B : m(lambda(x1),x2) => alpha(e,x1,x2) ; lambda(m(x1,x2))
  C : m(rho(x1),x2) => alpha(x1,e,x2) ; m(x1,lambda(x2))
  D : rho(m(x1,x2)) => alpha(x1,x2,e) ; m(x1,rho(x2))
  E : lambda(e) => rho(e)
subset W = {alpha, lambda, rho}
interp
  m = 2*x1 + x2 + 0
  e = 1
)thy";

inline const char* kSMonTheory = R"thy(
signature
  m : 2
  e : 0
rules
  alpha : m(m(x1,x2),x3) => m(x1,m(x2,x3))
  lambda : m(e,x1) => x1
  rho : m(x1,e) => x1
  gamma : m(x1,x2) => m(x2,x1)
coherence
  A : m(alpha(x1,x2,x3),x4) ; alpha(x1,m(x2,x3),x4) ; m(x1,alpha(x2,x3,x4)) => alpha(m(x1,x2),x3,x4) ; alpha(x1,x2,m(x3,x4))
  B : m(lambda(x1),x2) => alpha(e,x1,x2) ; lambda(m(x1,x2))
  C : m(rho(x1),x2) => alpha(x1,e,x2) ; m(x1,lambda(x2))
  D : rho(m(x1,x2)) => alpha(x1,x2,e) ; m(x1,rho(x2))
  E : lambda(e) => rho(e)
  F : gamma(x1,x2) ; gamma(x2,x1) => id(m(x1,x2))
  G : m(gamma(x1,x2),x3) ; alpha(x2,x1,x3) ; m(x2,gamma(x1,x3)) => alpha(x1,x2,x3) ; gamma(x1,m(x2,x3)) ; alpha(x2,x3,x1)
  I : gamma(e,x1) ; rho(x1) => lambda(x1)
subset W = {alpha, lambda, rho}
interp
  m = 2*x1 + x2 + 0
  e = 1
)thy";

inline const char* kSMonPrimeTheory = R"thy(
signature
  m : 2
  e : 0
rules
  alpha : m(m(x1,x2),x3) => m(x1,m(x2,x3))
  lambda : m(e,x1) => x1
  rho : m(x1,e) => x1
  gamma : m(x1,x2) => m(x2,x1)
  delta : m(x1,m(x2,x3)) => m(x2,m(x1,x3))
coherence
  A : m(alpha(x1,x2,x3),x4) ; alpha(x1,m(x2,x3),x4) ; m(x1,alpha(x2,x3,x4)) => alpha(m(x1,x2),x3,x4) ; alpha(x1,x2,m(x3,x4))
  B : m(lambda(x1),x2) => alpha(e,x1,x2) ; lambda(m(x1,x2))
  C : m(rho(x1),x2) => alpha(x1,e,x2) ; m(x1,lambda(x2))
  D : rho(m(x1,x2)) => alpha(x1,x2,e) ; m(x1,rho(x2))
  E : lambda(e) => rho(e)
  F : gamma(x1,x2) ; gamma(x2,x1) => id(m(x1,x2))
  F' : delta(x1,x2,x3) ; delta(x2,x1,x3) => id(m(x1,m(x2,x3)))
  G' : m(gamma(x1,x2),x3) ; alpha(x2,x1,x3) => alpha(x1,x2,x3) ; delta(x1,x2,x3)
  H : gamma(m(x1,x2),x3) => alpha(x1,x2,x3) ; m(x1,gamma(x2,x3)) ; delta(x1,x3,x2)
  I : gamma(e,x1) ; rho(x1) => lambda(x1)
  J : gamma(x1,e) ; lambda(x1) => rho(x1)
  K : delta(m(x1,x2),x3,x4) ; m(x3,alpha(x1,x2,x4)) => alpha(x1,x2,m(x3,x4)) ; m(x1,delta(x2,x3,x4)) ; delta(x1,x3,m(x2,x4))
  L : delta(x1,m(x2,x3),x4) ; alpha(x2,x3,m(x1,x4)) => m(x1,alpha(x2,x3,x4)) ; delta(x1,x2,m(x3,x4)) ; m(x2,delta(x1,x3,x4))
  M : delta(x1,x2,x3) ; m(x2,gamma(x1,x3)) => gamma(x1,m(x2,x3)) ; alpha(x2,x3,x1)
  N : delta(x1,x2,x3) ; m(x2,gamma(x1,x3)) ; delta(x2,x3,x1) => m(x1,gamma(x2,x3)) ; delta(x1,x3,x2) ; m(x3,gamma(x1,x2))
  O : delta(x1,x2,m(x3,x4)) ; m(x2,delta(x1,x3,x4)) ; delta(x2,x3,m(x1,x4)) => m(x1,delta(x2,x3,x4)) ; delta(x1,x3,m(x2,x4)) ; m(x3,delta(x1,x2,x4))
  P : delta(e,x1,x2) ; m(x1,lambda(x2)) => lambda(m(x1,x2))
  Q : delta(x1,e,x2) ; lambda(m(x1,x2)) => m(x1,lambda(x2))
  R : delta(x1,x2,e) ; m(x2,rho(x1)) ; gamma(x2,x1) => m(x1,rho(x2))
subset W = {alpha, lambda, rho}
interp
  m = 2*x1 + x2 + 0
  e = 1
)thy";

inline Trs2 builtin_mon() { return parse_theory(kMonTheory); }
inline Trs2 builtin_smon() { return parse_theory(kSMonTheory); }
inline Trs2 builtin_smon_prime() { return parse_theory(kSMonPrimeTheory); }

inline Trs2 builtin_theory(const std::string& name) {
  if (name == "mon") return builtin_mon();
  if (name == "smon") return builtin_smon();
  if (name == "smon-prime") return builtin_smon_prime();
  throw ContractError("unknown builtin theory: " + name);
}

// ---------------------------------------------------------------------------
// The explicit theory of color lists.

struct ColorList {
  int source_arity = 0;
  std::vector<int> colors;

  void check() const {
    for (int c : colors)
      if (c < 0 || c >= source_arity) throw ContractError("color out of range");
  }
  bool operator==(const ColorList& o) const {
    return source_arity == o.source_arity && colors == o.colors;
  }
};

// A 2-cell of the explicit theory: a color-preserving bijection between two
// color lists, recorded as map : target positions -> source positions, so
// from.colors[map[i]] == to.colors[i].
struct ColorBijection {
  ColorList from, to;
  std::vector<int> map;

  void check() const {
    if (from.colors.size() != to.colors.size() || map.size() != to.colors.size())
      throw ContractError("bijection endpoint length mismatch");
    std::vector<bool> hit(map.size(), false);
    for (size_t i = 0; i < map.size(); ++i) {
      int j = map[i];
      if (j < 0 || j >= static_cast<int>(map.size()) || hit[j])
        throw ContractError("not a bijection");
      hit[j] = true;
      if (from.colors[j] != to.colors[i]) throw ContractError("bijection not color-preserving");
    }
  }
  bool operator==(const ColorBijection& o) const {
    return from == o.from && to == o.to && map == o.map;
  }

  static ColorBijection identity(const ColorList& f) {
    ColorBijection b;
    b.from = f;
    b.to = f;
    b.map.resize(f.colors.size());
    std::iota(b.map.begin(), b.map.end(), 0);
    return b;
  }

  ColorBijection inverse() const {
    ColorBijection b;
    b.from = to;
    b.to = from;
    b.map.resize(map.size());
    for (size_t i = 0; i < map.size(); ++i) b.map[map[i]] = static_cast<int>(i);
    return b;
  }
};

// One-line cycle notation, e.g. "(0 1)(2 3)" or "id".
inline std::string cycle_notation(const std::vector<int>& perm) {
  std::string out;
  std::vector<bool> done(perm.size(), false);
  for (size_t i = 0; i < perm.size(); ++i) {
    if (done[i] || perm[i] == static_cast<int>(i)) continue;
    out += "(";
    size_t j = i;
    bool first = true;
    while (!done[j]) {
      done[j] = true;
      if (!first) out += " ";
      out += std::to_string(j);
      first = false;
      j = perm[j];
    }
    out += ")";
  }
  return out.empty() ? "id" : out;
}

inline ColorList s_compose_1cells(const std::vector<ColorList>& fs, const ColorList& g) {
  ColorList out;
  out.source_arity = fs.empty() ? 0 : fs[0].source_arity;
  for (int c : g.colors) {
    if (c < 0 || c >= static_cast<int>(fs.size()))
      throw ContractError("s_compose_1cells: color indexes no member");
    for (int x : fs[c].colors) out.colors.push_back(x);
  }
  return out;
}

// Vertical composition: alpha : f -> g then beta : g -> h, maps composed as
// functions (target positions chase back to source positions).
inline ColorBijection s_vertical_compose(const ColorBijection& alpha, const ColorBijection& beta) {
  if (!(alpha.to == beta.from)) throw ContractError("s_vertical_compose: endpoints do not chain");
  ColorBijection out;
  out.from = alpha.from;
  out.to = beta.to;
  out.map.resize(beta.map.size());
  for (size_t i = 0; i < beta.map.size(); ++i) out.map[i] = alpha.map[beta.map[i]];
  return out;
}

// Whiskering by a tuple of 1-cells: alpha : f -> g (colors indexing hs) acts
// blockwise on the flattened composites hs*f -> hs*g.
inline ColorBijection s_whisker(const ColorBijection& alpha, const std::vector<ColorList>& hs) {
  ColorBijection out;
  out.from = s_compose_1cells(hs, alpha.from);
  out.to = s_compose_1cells(hs, alpha.to);
  std::vector<int> from_start(alpha.from.colors.size() + 1, 0);
  for (size_t j = 0; j < alpha.from.colors.size(); ++j)
    from_start[j + 1] = from_start[j] + static_cast<int>(hs[alpha.from.colors[j]].colors.size());
  for (size_t i = 0; i < alpha.to.colors.size(); ++i) {
    int src_block = alpha.map[i];
    int len = static_cast<int>(hs[alpha.to.colors[i]].colors.size());
    for (int o = 0; o < len; ++o) out.map.push_back(from_start[src_block] + o);
  }
  return out;
}

// All color-preserving bijections between two color lists (empty when the
// color multisets differ).
inline std::vector<ColorBijection> all_color_bijections(const ColorList& f, const ColorList& g) {
  std::vector<ColorBijection> out;
  if (f.colors.size() != g.colors.size()) return out;
  size_t k = f.colors.size();
  std::vector<int> map(k, -1);
  std::vector<bool> used(k, false);
  // Backtracking over target positions.
  std::vector<size_t> stack;
  size_t i = 0;
  int next = 0;
  while (true) {
    if (i == k) {
      ColorBijection b;
      b.from = f;
      b.to = g;
      b.map = map;
      out.push_back(b);
      if (i == 0) break;
      --i;
      next = map[i] + 1;
      used[map[i]] = false;
      map[i] = -1;
      continue;
    }
    int j = next;
    while (j < static_cast<int>(k) && (used[j] || f.colors[j] != g.colors[i])) ++j;
    if (j < static_cast<int>(k)) {
      map[i] = j;
      used[j] = true;
      ++i;
      next = 0;
    } else {
      if (i == 0) break;
      --i;
      next = map[i] + 1;
      used[map[i]] = false;
      map[i] = -1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// From terms to color lists.

inline std::vector<int> w_subset(const Trs2& trs) { return trs.subset_or_all("W"); }

inline ColorList term_to_colorlist(const Trs2& trs, const Term& t) {
  Term nf = normalize_w(trs, t, w_subset(trs)).first;
  ColorList out;
  out.source_arity = t.arity();
  for (int v : vars(nf)) out.colors.push_back(v - 1);
  return out;
}

// ---------------------------------------------------------------------------
// The underlying bijection of a zig-zag.

namespace detail {

enum class StepShape { OrderPreserving, Gamma, Delta };

inline StepShape classify_rule(const TrsRule& r) {
  if (vars(r.lhs) == vars(r.rhs)) return StepShape::OrderPreserving;
  if (r.arity == 2 && vars(r.lhs) == std::vector<int>{1, 2} &&
      vars(r.rhs) == std::vector<int>{2, 1})
    return StepShape::Gamma;
  if (r.arity == 3 && vars(r.lhs) == std::vector<int>{1, 2, 3} &&
      vars(r.rhs) == std::vector<int>{2, 1, 3})
    return StepShape::Delta;
  throw ContractError("unsupported rule shape for underlying bijection: " + r.id);
}

inline int vars_before_hole(const Term& body) {
  if (body.is_hole()) return 0;
  int n = 0;
  for (const Term& a : body.args()) {
    if (hole_occurrences(a) == 1) return n + vars_before_hole(a);
    n += static_cast<int>(vars(a).size());
  }
  throw ContractError("vars_before_hole: no hole");
}

// Forward bijection of a single step: step-target positions -> step-source
// positions, over the whole term's variable occurrences.
inline std::vector<int> step_forward_map(const Trs2& trs, const TermRewriteStep& s, int total) {
  std::vector<int> map(total);
  std::iota(map.begin(), map.end(), 0);
  StepShape shape = classify_rule(trs.rules[s.rule]);
  if (shape == StepShape::OrderPreserving) return map;
  int a = vars_before_hole(s.ctx.body);
  int b1 = static_cast<int>(vars(s.subst.components[0]).size());
  int b2 = static_cast<int>(vars(s.subst.components[1]).size());
  // Gamma swaps the first two blocks; delta likewise (its third block stays).
  for (int i = 0; i < b2; ++i) map[a + i] = a + b1 + i;
  for (int j = 0; j < b1; ++j) map[a + b2 + j] = a + j;
  return map;
}

inline std::vector<int> invert_perm(const std::vector<int>& p) {
  std::vector<int> q(p.size());
  for (size_t i = 0; i < p.size(); ++i) q[p[i]] = static_cast<int>(i);
  return q;
}

}  // namespace detail

inline ColorBijection underlying_bijection(const Trs2& trs, const TermZigZag& p) {
  if (!well_composed(trs, p)) throw ContractError("underlying_bijection: ill-composed zig-zag");
  int total = static_cast<int>(vars(p.src).size());
  std::vector<int> acc(total);  // current positions -> start positions
  std::iota(acc.begin(), acc.end(), 0);
  for (const TermRewriteStep& s : p.steps) {
    std::vector<int> fwd = detail::step_forward_map(trs, s, total);
    std::vector<int> sigma = s.forward ? fwd : detail::invert_perm(fwd);
    std::vector<int> next(total);
    for (int i = 0; i < total; ++i) next[i] = acc[sigma[i]];
    acc = std::move(next);
  }
  ColorBijection out;
  out.from = term_to_colorlist(trs, p.src);
  out.to = term_to_colorlist(trs, zigzag_target(trs, p));
  out.map = std::move(acc);
  out.check();
  return out;
}

// ---------------------------------------------------------------------------
// Equality of 2-cells in the symmetric theories.

struct DecideResult {
  bool equal = false;
  ColorBijection left, right;
  std::string justification;
};

inline DecideResult decide_equal_smc(const Trs2& trs, const TermZigZag& p, const TermZigZag& q) {
  if (!(p.src == q.src) || !(zigzag_target(trs, p) == zigzag_target(trs, q)))
    throw ContractError("decide_equal_smc: zig-zags not parallel");
  DecideResult res;
  res.left = underlying_bijection(trs, p);
  res.right = underlying_bijection(trs, q);
  res.equal = res.left == res.right;
  res.justification =
      "equality decided in the quotient theory of color lists; the quotient functor is a local "
      "equivalence because the associativity/unit subset is convergent, hence 2-rigid";
  return res;
}

// ---------------------------------------------------------------------------
// Affine operations.

// The unique 2-cell between affine terms with the same variable set, with a
// realizing path: normalize both, permute adjacent leaves of the right comb,
// then undo the second normalization.
struct Affine2Cell {
  bool present = false;
  ColorBijection bijection;
  TermZigZag path;  // from t to u
};

namespace detail {

// The right comb of the k-th tail at the given leaf list; pos i holds the
// context for a swap of leaves i, i+1.
inline TermZigZag comb_swap(const Trs2& trs, const Term& comb, int i) {
  // The comb is m(y1, m(y2, ... m(y_{k-1}, y_k)...)).
  const Term* at = &comb;
  Position pos;
  for (int d = 0; d < i; ++d) {
    pos.push_back(1);
    at = &at->args()[1];
  }
  // at = m(y_{i+1}, rest). rest a leaf -> gamma; rest a comb tail -> delta.
  int gamma = *trs.find_rule("gamma");
  int delta = *trs.find_rule("delta");
  TermZigZag z;
  z.src = comb;
  const Term& sub = *at;
  Substitution f;
  f.source_arity = comb.arity();
  if (sub.args()[1].is_app() && sub.args()[1].symbol() == "m") {
    f.components = {sub.args()[0], sub.args()[1].args()[0], sub.args()[1].args()[1]};
    z.steps.push_back({delta, context_at(comb, pos), f, true});
  } else {
    f.components = {sub.args()[0], sub.args()[1]};
    z.steps.push_back({gamma, context_at(comb, pos), f, true});
  }
  return z;
}

}  // namespace detail

inline Affine2Cell affine_2cell(const Trs2& trs, const Term& t, const Term& u) {
  if (!is_affine(t)) throw ContractError("affine_2cell: t is not affine");
  Affine2Cell out;
  std::vector<int> vt = vars(t), vu = vars(u);
  std::sort(vt.begin(), vt.end());
  std::sort(vu.begin(), vu.end());
  if (vt != vu || !is_affine(u)) return out;

  std::vector<int> w = w_subset(trs);
  auto [tn, tpath] = normalize_w(trs, t, w);
  auto [un, upath] = normalize_w(trs, u, w);

  TermZigZag path;
  path.src = t;
  for (const TermRewriteStep& s : tpath) path.steps.push_back(s);

  // Bubble the leaf sequence of tn into that of un.
  std::vector<int> cur = vars(tn);
  std::vector<int> want = vars(un);
  Term comb = tn;
  for (size_t i = 0; i < want.size(); ++i) {
    size_t j = i;
    while (j < cur.size() && cur[j] != want[i]) ++j;
    if (j >= cur.size()) throw ContractError("affine_2cell: leaf mismatch");
    while (j > i) {
      TermZigZag swap = detail::comb_swap(trs, comb, static_cast<int>(j - 1));
      comb = zigzag_target(trs, swap);
      path.steps.push_back(swap.steps[0]);
      std::swap(cur[j - 1], cur[j]);
      --j;
    }
  }
  if (!(comb == un)) throw ContractError("affine_2cell: permutation did not reach target comb");
  for (size_t i = upath.size(); i-- > 0;) {
    TermRewriteStep s = upath[i];
    s.forward = false;
    path.steps.push_back(s);
  }
  out.present = true;
  out.path = std::move(path);
  out.bijection = underlying_bijection(trs, out.path);
  return out;
}

// Affine lift: fresh left-to-right variables plus the renaming back.
inline std::pair<Term, Substitution> affine_lift(const Term& t) {
  std::vector<int> occ = vars(t);
  int k = static_cast<int>(occ.size());
  int counter = 0;
  // Rebuild t with occurrence-indexed variables.
  auto rebuild = [&](auto&& self, const Term& x) -> Term {
    if (x.is_var()) return Term::variable(k, ++counter);
    std::vector<Term> args;
    for (const Term& a : x.args()) args.push_back(self(self, a));
    return Term::app(k, x.symbol(), std::move(args));
  };
  Term lifted = rebuild(rebuild, t);
  Substitution f;
  f.source_arity = t.arity();
  for (int v : occ) f.components.push_back(Term::variable(t.arity(), v));
  return {lifted, f};
}

// Lift a zig-zag from t = substitute(lifted, f) to one from the lifted term;
// requires linear rule left- and right-hand sides along the path.
inline TermZigZag lift_zigzag(const Trs2& trs, const TermZigZag& p, const Term& lifted,
                              const Substitution& f) {
  if (!(substitute(lifted, f) == p.src)) throw ContractError("lift_zigzag: renaming mismatch");
  TermZigZag out;
  out.src = lifted;
  Term down = p.src;
  Term up = lifted;
  for (const TermRewriteStep& s : p.steps) {
    Position pos = hole_position(s.ctx.body);
    const TrsRule& rule = trs.rules[s.rule];
    const Term& pat = s.forward ? rule.lhs : rule.rhs;
    auto g = match(pat, subterm_at(up, pos));
    if (!g) throw ContractError("lift_zigzag: step does not lift (non-linear pattern)");
    TermRewriteStep lifted_step{s.rule, context_at(up, pos), *g, s.forward};
    Term next_up = step_target(trs, lifted_step);
    Term next_down = step_target(trs, s);
    if (!(substitute(next_up, f) == next_down))
      throw ContractError("lift_zigzag: lift does not project back");
    out.steps.push_back(std::move(lifted_step));
    up = next_up;
    down = next_down;
  }
  return out;
}

// ---------------------------------------------------------------------------
// The pruned affine system.

struct PrunedSystem {
  Ars2 ars;
  std::vector<Term> object_term;
  // Per ARS rule (by current index), the instantiating term step.
  std::vector<TermRewriteStep> rule_step;
  std::vector<bool> object_affine;
};

namespace detail {

// Lexicographic order on vars-lists with x1 maximal: xi beats xj iff i <= j.
// Returns true when a is strictly greater than b.
inline bool vars_list_greater(const std::vector<int>& a, const std::vector<int>& b) {
  for (size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return a.size() > b.size();
}

}  // namespace detail

inline PrunedSystem build_p_double_prime(int n, int size_bound) {
  Trs2 trs = builtin_smon_prime();
  HomArs h = hom_ars(trs, n, size_bound);

  int gamma = *trs.find_rule("gamma");
  int delta = *trs.find_rule("delta");
  int lambda = *trs.find_rule("lambda");
  int rho = *trs.find_rule("rho");

  // P' = restriction to lambda/rho-normal forms (unit-free terms plus e).
  std::vector<int> unit_rules;
  for (size_t r = 0; r < h.rule_step.size(); ++r)
    if (h.rule_step[r].rule == lambda || h.rule_step[r].rule == rho)
      unit_rules.push_back(static_cast<int>(r));
  RuleSubset units = RuleSubset::of(h.ars, unit_rules);

  PrunedSystem p;
  std::vector<int> obj_map(h.ars.objects.size(), -1);
  for (size_t x = 0; x < h.ars.objects.size(); ++x)
    if (is_w_normal(h.ars, units, static_cast<int>(x))) {
      obj_map[x] = p.ars.add_object(h.ars.objects[x]);
      p.object_term.push_back(h.object_term[x]);
    }
  std::vector<int> rule_map(h.ars.rules.size(), -1);
  for (size_t r = 0; r < h.ars.rules.size(); ++r) {
    const auto& rule = h.ars.rules[r];
    if (obj_map[rule.src] >= 0 && obj_map[rule.tgt] >= 0) {
      rule_map[r] = p.ars.add_rule(rule.id, obj_map[rule.src], obj_map[rule.tgt]);
      p.rule_step.push_back(h.rule_step[r]);
    }
  }
  {
    auto remap = [&](const ZigZag& z, ZigZag& dst) -> bool {
      if (obj_map[z.src] < 0) return false;
      dst.src = obj_map[z.src];
      dst.steps.clear();
      for (const SignedStep& s : z.steps) {
        if (rule_map[s.rule] < 0) return false;
        dst.steps.push_back({rule_map[s.rule], s.forward});
      }
      return true;
    };
    for (const auto& c : h.ars.cells) {
      ZigZag s, t;
      if (remap(c.source, s) && remap(c.target, t)) p.ars.add_cell(c.id, s, t);
    }
  }

  // P'' = remove the non-decreasing gamma/delta orientations, rewriting the
  // other cells through the corresponding F/F' instances (Tietze moves).
  struct Removal {
    std::string rule_id;
    std::string cell_id;  // empty: no usable inverse cell, remove directly
  };
  std::vector<Removal> removals;
  for (size_t r = 0; r < p.rule_step.size(); ++r) {
    const TermRewriteStep& s = p.rule_step[r];
    if (s.rule != gamma && s.rule != delta) continue;
    int src_obj = p.ars.rules[r].src;
    int tgt_obj = p.ars.rules[r].tgt;
    if (detail::vars_list_greater(vars(p.object_term[src_obj]), vars(p.object_term[tgt_obj])))
      continue;  // decreasing, keep
    Removal rm;
    rm.rule_id = p.ars.rules[r].id;
    if (tgt_obj != src_obj) {
      Position pos = hole_position(s.ctx.body);
      rm.cell_id = std::string(s.rule == gamma ? "F" : "F'") + "@" + position_string(pos) + ":" +
                   p.ars.objects[src_obj];
    }
    removals.push_back(std::move(rm));
  }

  // A rule is removable through its inverse cell only while that cell still
  // has the rule exactly once, forward, in its source and not in its target.
  // Removing the opposite orientation first (both can be non-decreasing when
  // the argument blocks carry equal variable lists) invalidates the cell.
  auto cell_usable = [&](int rule, const CoherenceCell& c) {
    int count = 0;
    size_t at = 0;
    for (size_t i = 0; i < c.source.steps.size(); ++i)
      if (c.source.steps[i].rule == rule) {
        ++count;
        at = i;
      }
    if (count != 1 || !c.source.steps[at].forward) return false;
    for (const SignedStep& s : c.target.steps)
      if (s.rule == rule) return false;
    return true;
  };

  for (const Removal& rm : removals) {
    auto r = p.ars.find_rule(rm.rule_id);
    if (!r) continue;
    if (!rm.cell_id.empty()) {
      auto c = p.ars.find_cell(rm.cell_id);
      if (c && cell_usable(*r, p.ars.cells[*c])) {
        Ars2 next = tietze_remove_rule(p.ars, *r, *c);
        // Remap the step table by rule id.
        std::vector<TermRewriteStep> steps(next.rules.size());
        for (size_t i = 0; i < next.rules.size(); ++i)
          steps[i] = p.rule_step[*p.ars.find_rule(next.rules[i].id)];
        p.ars = std::move(next);
        p.rule_step = std::move(steps);
        continue;
      }
    }
    // Loops (self-inverse instances) and instances without a usable inverse
    // cell: drop the rule and every cell mentioning it.
    Ars2 next;
    next.objects = p.ars.objects;
    std::vector<int> rmap(p.ars.rules.size(), -1);
    std::vector<TermRewriteStep> steps;
    for (size_t i = 0; i < p.ars.rules.size(); ++i)
      if (static_cast<int>(i) != *r) {
        rmap[i] = next.add_rule(p.ars.rules[i].id, p.ars.rules[i].src, p.ars.rules[i].tgt);
        steps.push_back(p.rule_step[i]);
      }
    auto remap = [&](const ZigZag& z, ZigZag& dst) -> bool {
      dst.src = z.src;
      dst.steps.clear();
      for (const SignedStep& s : z.steps) {
        if (rmap[s.rule] < 0) return false;
        dst.steps.push_back({rmap[s.rule], s.forward});
      }
      return true;
    };
    for (const auto& c : p.ars.cells) {
      ZigZag s, t;
      if (remap(c.source, s) && remap(c.target, t)) next.add_cell(c.id, s, t);
    }
    p.ars = std::move(next);
    p.rule_step = std::move(steps);
  }

  p.object_affine.resize(p.object_term.size());
  for (size_t i = 0; i < p.object_term.size(); ++i)
    p.object_affine[i] = is_affine(p.object_term[i]);
  return p;
}

// Restriction of a pruned system to its affine objects.
inline PrunedSystem restrict_to_affine(const PrunedSystem& p) {
  PrunedSystem out;
  std::vector<int> obj_map(p.ars.objects.size(), -1);
  for (size_t x = 0; x < p.ars.objects.size(); ++x)
    if (p.object_affine[x]) {
      obj_map[x] = out.ars.add_object(p.ars.objects[x]);
      out.object_term.push_back(p.object_term[x]);
      out.object_affine.push_back(true);
    }
  std::vector<int> rule_map(p.ars.rules.size(), -1);
  for (size_t r = 0; r < p.ars.rules.size(); ++r)
    if (obj_map[p.ars.rules[r].src] >= 0 && obj_map[p.ars.rules[r].tgt] >= 0) {
      rule_map[r] = out.ars.add_rule(p.ars.rules[r].id, obj_map[p.ars.rules[r].src],
                                     obj_map[p.ars.rules[r].tgt]);
      out.rule_step.push_back(p.rule_step[r]);
    }
  auto remap = [&](const ZigZag& z, ZigZag& dst) -> bool {
    if (obj_map[z.src] < 0) return false;
    dst.src = obj_map[z.src];
    dst.steps.clear();
    for (const SignedStep& s : z.steps) {
      if (rule_map[s.rule] < 0) return false;
      dst.steps.push_back({rule_map[s.rule], s.forward});
    }
    return true;
  };
  for (const auto& c : p.ars.cells) {
    ZigZag s, t;
    if (remap(c.source, s) && remap(c.target, t)) out.ars.add_cell(c.id, s, t);
  }
  return out;
}

}  // namespace cohrw
