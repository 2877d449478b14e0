#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>

#include "cohrw/smc.hpp"

using namespace cohrw;

namespace {

Term random_term(std::mt19937& rng, const Signature& sig, int arity, int depth) {
  std::uniform_int_distribution<int> kind(0, 2);
  int k = depth == 0 ? (arity > 0 ? 0 : 1) : kind(rng);
  if (k == 0 && arity > 0) {
    std::uniform_int_distribution<int> v(1, arity);
    return Term::variable(arity, v(rng));
  }
  std::uniform_int_distribution<int> si(0, static_cast<int>(sig.symbols.size()) - 1);
  const auto& sym = sig.symbols[depth == 0 ? 1 : si(rng)];
  std::vector<Term> args;
  for (int i = 0; i < sym.arity; ++i) args.push_back(random_term(rng, sig, arity, depth - 1));
  return Term::app(arity, sym.name, std::move(args));
}

Position redex_position(const TermRewriteStep& s) { return hole_position(s.ctx.body); }

}  // namespace

TEST_CASE("matching") {
  Trs2 mon = builtin_mon();
  const Signature& sig = mon.sig;
  Term pat = parse_term("m(m(x1,x2),x3)", 3, sig);
  Term sub = parse_term("m(m(e,x1),e)", 1, sig);
  auto f = match(pat, sub);
  REQUIRE(f);
  CHECK(f->source_arity == 1);
  CHECK(print_term(f->components[0]) == "e");
  CHECK(print_term(f->components[1]) == "x1");
  CHECK(print_term(f->components[2]) == "e");
  CHECK(substitute(pat, *f) == sub);

  // Non-linear pattern: both occurrences must agree.
  Term dup = parse_term("m(x1,x1)", 1, sig);
  CHECK(match(dup, parse_term("m(e,e)", 0, sig)));
  CHECK(!match(dup, parse_term("m(e,x1)", 1, sig)));
  // Every pattern variable must be bound.
  CHECK(!match(parse_term("m(x1,x2)", 2, sig), parse_term("e", 0, sig)));
  // A pattern variable matches any subject.
  CHECK(match(parse_term("x1", 1, sig), parse_term("e", 0, sig)));
}

TEST_CASE("unification") {
  Trs2 mon = builtin_mon();
  const Signature& sig = mon.sig;

  SECTION("occurs check") {
    Term x1 = parse_term("x1", 2, sig);
    Term t = parse_term("m(x1,x2)", 2, sig);
    CHECK(!unify(x1, t));
    CHECK(unify(x1, parse_term("x2", 2, sig)));
  }
  SECTION("shared variables are unified, not renamed apart") {
    Term a = parse_term("m(x1,x2)", 2, sig);
    Term b = parse_term("m(x2,x1)", 2, sig);
    auto f = unify(a, b);
    REQUIRE(f);
    CHECK(substitute(a, *f) == substitute(b, *f));
    // Most general: both variables map to one variable, no constants appear.
    CHECK(f->components[0] == f->components[1]);
    CHECK(f->components[0].is_var());
  }
  SECTION("clash") {
    CHECK(!unify(parse_term("e", 0, sig), parse_term("m(x1,x2)", 2, sig)));
  }
  SECTION("random unifiers actually unify and are idempotent") {
    std::mt19937 rng(99);
    for (int i = 0; i < 2000; ++i) {
      Term t = random_term(rng, sig, 2, 2);
      Term u = random_term(rng, sig, 2, 2);
      auto f = unify(t, u);
      if (!f) continue;
      CHECK(substitute(t, *f) == substitute(u, *f));
      // Idempotence: applying the unifier to its own components is stable.
      for (const Term& c : f->components) CHECK(substitute(c, *f) == c);
    }
  }
  SECTION("most general on small instances") {
    // If unify fails, no common instance exists among small substitutions.
    std::mt19937 rng(4242);
    std::vector<Term> ground = {parse_term("e", 0, sig), parse_term("m(e,e)", 0, sig)};
    for (int i = 0; i < 300; ++i) {
      Term t = random_term(rng, sig, 2, 1);
      Term u = random_term(rng, sig, 2, 1);
      if (unify(t, u)) continue;
      for (const Term& a : ground)
        for (const Term& b : ground) {
          Substitution g;
          g.source_arity = 0;
          g.components = {a, b};
          CHECK(!(substitute(t, g) == substitute(u, g)));
        }
    }
  }
}

TEST_CASE("redex enumeration") {
  Trs2 mon = builtin_mon();
  Term t = parse_term("m(m(e,x1),e)", 1, mon.sig);
  auto rs = redexes(mon, t);
  REQUIRE(rs.size() == 3);
  // Preorder by position, rule order within a position.
  CHECK(mon.rules[rs[0].rule].id == "alpha");
  CHECK(redex_position(rs[0]).empty());
  CHECK(mon.rules[rs[1].rule].id == "rho");
  CHECK(redex_position(rs[1]).empty());
  CHECK(mon.rules[rs[2].rule].id == "lambda");
  CHECK(redex_position(rs[2]) == Position{0});
  for (const TermRewriteStep& s : rs) CHECK(step_source(mon, s) == t);
  CHECK(redexes(mon, parse_term("x1", 1, mon.sig)).empty());
}

TEST_CASE("rewrite steps are stable under bicontexts") {
  Trs2 mon = builtin_mon();
  std::mt19937 rng(31);
  for (int i = 0; i < 500; ++i) {
    Term t = random_term(rng, mon.sig, 2, 3);
    auto rs = redexes(mon, t);
    if (rs.empty()) continue;
    const TermRewriteStep& s = rs[rng() % rs.size()];
    int n = 1 + static_cast<int>(rng() % 2);
    Context c{n, Term::app(n, "m", {Term::hole(n), random_term(rng, mon.sig, n, 1)})};
    Substitution f;
    f.source_arity = n;
    for (int v = 0; v < 2; ++v) f.components.push_back(random_term(rng, mon.sig, n, 1));
    Bicontext B{c, f};
    TermRewriteStep inst = detail::instantiate_step(s, B);
    CHECK(step_source(mon, inst) == bicontext_apply(B, step_source(mon, s)));
    CHECK(step_target(mon, inst) == bicontext_apply(B, step_target(mon, s)));
  }
}

TEST_CASE("linear termination of the monoid subset") {
  Trs2 mon = builtin_mon();
  REQUIRE(mon.interp);
  auto rep = check_termination_linear(mon, mon.subset_or_all("W"), *mon.interp);
  CHECK(rep.decreasing);
  REQUIRE(rep.entries.size() == 3);
  CHECK(rep.entries[0].lhs_form == std::vector<long>{0, 4, 2, 1});
  CHECK(rep.entries[0].rhs_form == std::vector<long>{0, 2, 2, 1});
  CHECK(rep.entries[0].margin == std::vector<long>{0, 2, 0, 0});
  CHECK(rep.entries[1].margin == std::vector<long>{2, 0});

  Trs2 sp = builtin_smon_prime();
  REQUIRE(sp.interp);
  auto wrep = check_termination_linear(sp, sp.subset_or_all("W"), *sp.interp);
  CHECK(wrep.decreasing);
  // gamma is not decreasing under any linear interpretation: its two sides
  // have swapped coefficients.
  auto grep = check_termination_linear(sp, {*sp.find_rule("gamma")}, *sp.interp);
  CHECK(!grep.decreasing);
}

TEST_CASE("soundness of linear termination certificates") {
  // Replay: along any rewrite with certified rules, the interpretation value
  // at random points strictly drops.
  Trs2 mon = builtin_mon();
  std::mt19937 rng(55);
  auto value = [&](const Term& t, const std::vector<long>& point) {
    std::vector<long> form = linear_form(t, *mon.interp);
    long v = form[0];
    for (size_t i = 1; i < form.size(); ++i) v += form[i] * point[i - 1];
    return v;
  };
  for (int i = 0; i < 500; ++i) {
    Term t = random_term(rng, mon.sig, 2, 3);
    auto rs = redexes(mon, t);
    if (rs.empty()) continue;
    const TermRewriteStep& s = rs[rng() % rs.size()];
    std::vector<long> point = {1 + static_cast<long>(rng() % 5), 1 + static_cast<long>(rng() % 5)};
    CHECK(value(step_source(mon, s), point) > value(step_target(mon, s), point));
  }
}

TEST_CASE("leftmost-innermost normalization") {
  Trs2 mon = builtin_mon();
  std::vector<int> w = mon.subset_or_all("W");
  auto [nf, path] = normalize_w(mon, parse_term("m(m(e,x1),e)", 1, mon.sig), w);
  CHECK(print_term(nf) == "x1");
  REQUIRE(path.size() == 2);
  CHECK(mon.rules[path[0].rule].id == "lambda");
  CHECK(mon.rules[path[1].rule].id == "rho");

  auto [nf2, path2] = normalize_w(mon, parse_term("m(x1,m(x2,x3))", 3, mon.sig), w);
  CHECK(print_term(nf2) == "m(x1,m(x2,x3))");
  CHECK(path2.empty());

  // The W step bound guards nonterminating subsets.
  Trs2 smon = builtin_smon();
  CHECK_THROWS_AS(
      normalize_w(smon, parse_term("m(x1,x2)", 2, smon.sig), {*smon.find_rule("gamma")}, 50),
      BoundExhausted);
}

TEST_CASE("critical pairs of the monoid") {
  Trs2 mon = builtin_mon();
  auto cps = critical_pairs(mon);
  REQUIRE(cps.size() == 5);
  std::multiset<std::string> sources;
  for (const CriticalPair& cp : cps) sources.insert(print_term(cp.source));
  CHECK(sources == std::multiset<std::string>{"m(e,e)", "m(m(e,x1),x2)", "m(m(m(x1,x2),x3),x4)",
                                              "m(m(x1,e),x2)", "m(m(x1,x2),e)"});
  for (const CriticalPair& cp : cps) {
    // Both peak steps start from the source.
    CHECK(step_source(mon, cp.left) == cp.source);
    CHECK(step_source(mon, cp.right) == cp.source);
    CHECK(redex_position(cp.left).empty());
    CHECK(redex_position(cp.right) == cp.pos);
  }
}

TEST_CASE("critical pairs cover all overlapping branchings at small size") {
  Trs2 mon = builtin_mon();
  auto cps = critical_pairs(mon);
  auto covers = [&](int r1, int r2, const Position& rel, const Term& at) {
    for (const CriticalPair& cp : cps) {
      bool direct = cp.rule1 == r1 && cp.rule2 == r2 && cp.pos == rel;
      bool swapped = rel.empty() && cp.pos.empty() && cp.rule1 == r2 && cp.rule2 == r1;
      if ((direct || swapped) && match(cp.source, at)) return true;
    }
    return false;
  };
  // Walk the outer rule's lhs along rel; an overlap is critical when the walk
  // stays inside non-variable structure.
  auto critical_overlap = [&](int rule, const Position& rel) {
    const Term* t = &mon.rules[rule].lhs;
    for (int i : rel) {
      if (!t->is_app() || i >= static_cast<int>(t->args().size())) return false;
      t = &t->args()[i];
    }
    return !t->is_var();
  };
  for (const Term& t : detail::enumerate_terms(mon.sig, 2, 7)) {
    auto rs = redexes(mon, t);
    for (const TermRewriteStep& a : rs)
      for (const TermRewriteStep& b : rs) {
        Position pa = redex_position(a), pb = redex_position(b);
        if (pa.size() > pb.size()) continue;
        if (!std::equal(pa.begin(), pa.end(), pb.begin())) continue;
        Position rel(pb.begin() + pa.size(), pb.end());
        if (a.rule == b.rule && rel.empty()) continue;
        if (!critical_overlap(a.rule, rel)) continue;
        CHECK(covers(a.rule, b.rule, rel, subterm_at(t, pa)));
      }
  }
}

TEST_CASE("hom-wise instantiation") {
  Trs2 mon = builtin_mon();

  SECTION("size bound 1") {
    HomArs h = hom_ars(mon, 1, 1);
    CHECK(h.ars.objects == std::vector<std::string>{"x1", "e"});
    CHECK(h.ars.rules.empty());
  }
  SECTION("size bound 3") {
    HomArs h = hom_ars(mon, 1, 3);
    CHECK(h.ars.objects.size() == 6);
    CHECK(h.ars.rules.size() == 4);
    std::set<std::string> ids;
    for (const auto& r : h.ars.rules) ids.insert(r.id);
    CHECK(ids == std::set<std::string>{"lambda@[]:m(e,e)", "lambda@[]:m(e,x1)",
                                       "rho@[]:m(e,e)", "rho@[]:m(x1,e)"});
    CHECK(is_w_terminating(h.ars, RuleSubset::all(h.ars)));
  }
  SECTION("faithfulness") {
    HomArs h = hom_ars(mon, 2, 5);
    for (size_t r = 0; r < h.ars.rules.size(); ++r) {
      CHECK(step_source(mon, h.rule_step[r]) == h.object_term[h.ars.rules[r].src]);
      CHECK(step_target(mon, h.rule_step[r]) == h.object_term[h.ars.rules[r].tgt]);
    }
    // Completeness: every in-bound redex target appears as a rule.
    for (const Term& t : h.object_term)
      for (const TermRewriteStep& s : redexes(mon, t))
        if (step_target(mon, s).size() <= 5)
          CHECK(h.ars.find_rule(detail::hom_rule_key(mon, s)));
    // Cells instantiate only over objects large enough to host them.
    for (const auto& c : h.ars.cells) CHECK(c.id.find('@') != std::string::npos);
  }
  SECTION("gamma creates loops") {
    Trs2 smon = builtin_smon();
    HomArs h = hom_ars(smon, 2, 3);
    std::vector<int> gammas;
    for (size_t r = 0; r < h.rule_step.size(); ++r)
      if (smon.rules[h.rule_step[r].rule].id == "gamma") gammas.push_back(static_cast<int>(r));
    CHECK(!gammas.empty());
    CHECK(!is_w_terminating(h.ars, RuleSubset::of(h.ars, gammas)));
  }
  SECTION("reachable truncation") {
    Term seed = parse_term("m(m(e,x1),e)", 1, mon.sig);
    HomArs h = hom_ars_reachable(mon, {seed}, seed.size());
    CHECK(h.object_of(seed));
    CHECK(h.object_of(parse_term("x1", 1, mon.sig)));
    // Only forward-reachable terms appear.
    for (const Term& t : h.object_term) CHECK(t.size() <= seed.size());
    CHECK(h.ars.objects.size() == 5);
  }
}

TEST_CASE("coherent local confluence of the monoid") {
  Trs2 mon = builtin_mon();
  auto rep = check_local_confluence_coherent(mon, mon.subset_or_all("W"));
  CHECK(rep.entries.size() == 5);
  CHECK(rep.all_filled);
  CHECK(rep.termination_certified);
  CHECK(rep.verdict == "W-terminating and locally W-confluent with fillings, hence W-coherent");
  std::set<std::string> used;
  for (const auto& e : rep.entries) {
    CHECK(e.in_w);
    CHECK(e.joined);
    CHECK(e.filled);
    for (const auto& c : e.cells_used) used.insert(c);
  }
  for (const auto& c : used) CHECK(std::set<std::string>{"A", "B", "C", "D", "E"}.count(c));
}

TEST_CASE("a missing generating cell is detected") {
  Trs2 mon = builtin_mon();
  Trs2 crippled = mon;
  crippled.cells.erase(crippled.cells.begin());  // drop A
  auto rep = check_local_confluence_coherent(crippled, crippled.subset_or_all("W"), 3000);
  CHECK(!rep.all_filled);
  bool pentagon_open = false;
  for (const auto& e : rep.entries)
    if (e.source == "m(m(m(x1,x2),x3),x4)" && !e.filled) {
      pentagon_open = true;
      CHECK(e.joined);
    }
  CHECK(pentagon_open);
}

TEST_CASE("Tietze moves at term level") {
  Trs2 mon = builtin_mon();
  const Signature& sig = mon.sig;

  SECTION("add a definable rule then remove it") {
    TermZigZag p;
    p.src = parse_term("m(m(e,x1),e)", 1, sig);
    auto rs = redexes(mon, p.src);
    p.steps.push_back(rs[2]);  // lambda at [0]
    REQUIRE(well_composed(mon, p));
    Trs2 ext = tietze_trs_add_rule(mon, p, "shortcut", "shortcut_def");
    REQUIRE(ext.rules.size() == 4);
    CHECK(print_term(ext.rules[3].lhs) == "m(m(e,x1),e)");
    CHECK(print_term(ext.rules[3].rhs) == "m(x1,e)");
    REQUIRE(ext.cells.size() == 6);

    Trs2 back = tietze_trs_remove_rule(ext, 3, 5);
    CHECK(back.rules.size() == 3);
    CHECK(back.cells.size() == 5);
    for (size_t i = 0; i < back.cells.size(); ++i) {
      CHECK(back.cells[i].id == mon.cells[i].id);
      CHECK(back.cells[i].source.steps.size() == mon.cells[i].source.steps.size());
    }
    CHECK(!back.transcript.empty());
  }

  SECTION("adding a provable cell succeeds, an unprovable one does not") {
    TermZigZag p;
    p.src = parse_term("m(e,e)", 0, sig);
    auto rs = redexes(mon, p.src);
    // lambda and rho both send m(e,e) to e; their equality is cell E.
    TermZigZag q = p;
    for (const auto& s : rs) {
      if (mon.rules[s.rule].id == "lambda") p.steps = {s};
      if (mon.rules[s.rule].id == "rho") q.steps = {s};
    }
    REQUIRE(p.steps.size() == 1);
    REQUIRE(q.steps.size() == 1);
    Trs2 ext = tietze_trs_add_cell(mon, p, q, "E2");
    CHECK(ext.cells.size() == 6);

    Trs2 bare = mon;
    bare.cells.clear();
    CHECK_THROWS_AS(tietze_trs_add_cell(bare, p, q, "E2"), ContractError);
    CHECK_THROWS_AS(tietze_trs_add_cell(mon, p, TermZigZag{p.src, {}}, "bad"), ContractError);
  }

  SECTION("remove-rule preconditions") {
    // Cell A's source uses alpha twice: not removable through it.
    CHECK_THROWS_AS(tietze_trs_remove_rule(mon, *mon.find_rule("alpha"), *mon.find_cell("A")),
                    ContractError);
    // Cell B's source is alpha then lambda at a non-identity bicontext:
    // lambda is not at the identity occurrence.
    CHECK_THROWS_AS(tietze_trs_remove_rule(mon, *mon.find_rule("lambda"), *mon.find_cell("B")),
                    ContractError);
  }
}
