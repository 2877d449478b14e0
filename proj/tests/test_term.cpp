#include <catch_amalgamated.hpp>

#include <functional>
#include <random>

#include "cohrw/term.hpp"

using namespace cohrw;

namespace {

Signature mon_sig() {
  Signature s;
  s.add("m", 2);
  s.add("e", 0);
  return s;
}

// Random term of the given arity, possibly with one hole when asked.
Term random_term(std::mt19937& rng, const Signature& sig, int arity, int depth) {
  std::uniform_int_distribution<int> kind(0, 2);
  int k = depth == 0 ? (arity > 0 ? 0 : 1) : kind(rng);
  if (k == 0 && arity > 0) {
    std::uniform_int_distribution<int> v(1, arity);
    return Term::variable(arity, v(rng));
  }
  // Pick a symbol.
  std::uniform_int_distribution<int> si(0, static_cast<int>(sig.symbols.size()) - 1);
  const auto& sym = sig.symbols[depth == 0 ? 1 : si(rng)];
  std::vector<Term> args;
  for (int i = 0; i < sym.arity; ++i) args.push_back(random_term(rng, sig, arity, depth - 1));
  return Term::app(arity, sym.name, std::move(args));
}

Substitution random_subst(std::mt19937& rng, const Signature& sig, int n, int m, int depth) {
  Substitution f;
  f.source_arity = n;
  for (int i = 0; i < m; ++i) f.components.push_back(random_term(rng, sig, n, depth));
  return f;
}

Context random_context(std::mt19937& rng, const Signature& sig, int arity, int depth) {
  // Build a random term then graft a hole at a random leaf path.
  Term t = Term::app(arity, "m", {random_term(rng, sig, arity, depth), random_term(rng, sig, arity, depth)});
  // Walk down a random path and replace that subterm with a hole.
  std::vector<int> path;
  const Term* at = &t;
  std::uniform_int_distribution<int> coin(0, 1);
  while (at->is_app() && !at->args().empty() && coin(rng)) {
    int i = coin(rng) % static_cast<int>(at->args().size());
    path.push_back(i);
    at = &at->args()[i];
  }
  std::function<Term(const Term&, size_t)> graft = [&](const Term& x, size_t d) -> Term {
    if (d == path.size()) return Term::hole(arity);
    std::vector<Term> args = x.args();
    args[path[d]] = graft(args[path[d]], d + 1);
    return Term::app(arity, x.symbol(), std::move(args));
  };
  return Context{arity, graft(t, 0)};
}

}  // namespace

TEST_CASE("term construction and arity checks") {
  Signature sig = mon_sig();
  Term x1 = Term::variable(2, 1);
  Term t = Term::app(2, "m", {x1, Term::variable(2, 2)});
  CHECK(t.size() == 3);
  CHECK(vars(t) == std::vector<int>{1, 2});
  CHECK(is_affine(t));
  CHECK_THROWS_AS(Term::variable(2, 3), ArityError);
  CHECK_THROWS_AS(Term::variable(2, 0), ArityError);
  CHECK_THROWS_AS(Term::app(2, "m", {Term::variable(3, 1), x1}), ArityError);
  Term dup = Term::app(2, "m", {x1, x1});
  CHECK(!is_affine(dup));
  CHECK(occurrences(dup, 1) == 2);
  CHECK(occurrences(dup, 2) == 0);
}

TEST_CASE("printing and parsing round-trip") {
  Signature sig = mon_sig();
  CHECK(print_term(parse_term("m(m(e,x1),x2)", 2, sig)) == "m(m(e,x1),x2)");
  CHECK(print_term(parse_term(" m ( e , x1 ) ", 1, sig)) == "m(e,x1)");
  CHECK(print_term(parse_term("e", 0, sig)) == "e");
  CHECK_THROWS_AS(parse_term("m(x1)", 1, sig), SyntaxError);
  CHECK_THROWS_AS(parse_term("x3", 2, sig), SyntaxError);
  CHECK_THROWS_AS(parse_term("q(x1)", 1, sig), SyntaxError);
  CHECK_THROWS_AS(parse_term("m(x1,x2) x", 2, sig), SyntaxError);
  // Offsets point into the input.
  try {
    parse_term("m(e,q)", 0, sig);
    FAIL("expected syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.offset == 4);
  }
}

TEST_CASE("substitution basics") {
  Signature sig = mon_sig();
  Term t = parse_term("m(x1,m(x2,x1))", 2, sig);
  Substitution f;  // 1 -> 2
  f.source_arity = 1;
  f.components = {parse_term("e", 1, sig), parse_term("x1", 1, sig)};
  Term r = substitute(t, f);
  CHECK(print_term(r) == "m(e,m(x1,e))");
  CHECK(r.arity() == 1);
  CHECK(substitute(t, Substitution::identity(2)) == t);
}

TEST_CASE("substitution laws on random triples") {
  Signature sig = mon_sig();
  std::mt19937 rng(12345);
  for (int i = 0; i < 2000; ++i) {
    int n = 1 + static_cast<int>(rng() % 3);
    int m = 1 + static_cast<int>(rng() % 3);
    int k = 1 + static_cast<int>(rng() % 3);
    Term t = random_term(rng, sig, k, 2);
    Substitution f = random_subst(rng, sig, n, m, 2);   // n -> m
    Substitution g = random_subst(rng, sig, m, k, 2);   // m -> k
    // Associativity of action: t[g][f] = t[g o f].
    CHECK(substitute(substitute(t, g), f) == substitute(t, compose_subst(f, g)));
    // Identity laws.
    CHECK(substitute(t, Substitution::identity(k)) == t);
    CHECK(compose_subst(Substitution::identity(n), f) == f);
    CHECK(compose_subst(f, Substitution::identity(m)) == f);
  }
}

TEST_CASE("contexts and plugging") {
  Signature sig = mon_sig();
  Context c{2, Term::app(2, "m", {Term::hole(2), Term::variable(2, 2)})};
  c.check();
  CHECK(print_term(c.body) == "m([],x2)");
  CHECK(print_term(plug(c, parse_term("m(e,x1)", 2, sig))) == "m(m(e,x1),x2)");
  Context d = compose_context(c, c);
  CHECK(print_term(d.body) == "m(m([],x2),x2)");
  CHECK(hole_occurrences(d.body) == 1);
  Context bad{2, parse_term("m(x1,x2)", 2, sig)};
  CHECK_THROWS(bad.check());
}

TEST_CASE("bicontext action and composition law") {
  Signature sig = mon_sig();
  std::mt19937 rng(777);
  for (int i = 0; i < 2000; ++i) {
    int n = 1 + static_cast<int>(rng() % 2);
    int m = 1 + static_cast<int>(rng() % 2);
    int k = 1 + static_cast<int>(rng() % 2);
    Bicontext inner{random_context(rng, sig, m, 1), random_subst(rng, sig, m, k, 1)};
    Bicontext outer{random_context(rng, sig, n, 1), random_subst(rng, sig, n, m, 1)};
    Term t = random_term(rng, sig, k, 2);
    // The composite bicontext acts as the composite of the actions.
    Bicontext comp = compose_bicontext(outer, inner);
    CHECK(bicontext_apply(comp, t) == bicontext_apply(outer, bicontext_apply(inner, t)));
  }
}

TEST_CASE("hole parsing is rejected outside contexts") {
  Signature sig = mon_sig();
  CHECK_THROWS_AS(parse_term("[]", 1, sig), SyntaxError);
}
