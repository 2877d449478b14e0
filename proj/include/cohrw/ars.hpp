#pragma once

// Abstract rewriting systems with coherence cells (2-polygraphs): zig-zags,
// the coherence-equivalence search, Newman / Church-Rosser style checks,
// quotient and normal-form constructions, and Tietze moves.

#include <algorithm>
#include <deque>
#include <map>
#include <queue>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cohrw {

struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SignedStep {
  int rule = -1;
  bool forward = true;

  bool operator==(const SignedStep& o) const {
    return rule == o.rule && forward == o.forward;
  }
  SignedStep reversed() const { return {rule, !forward}; }
};

// A zig-zag with an explicit source object so that empty zig-zags have
// well-defined endpoints.
struct ZigZag {
  int src = -1;
  std::vector<SignedStep> steps;

  bool operator==(const ZigZag& o) const { return src == o.src && steps == o.steps; }
  size_t length() const { return steps.size(); }
};

struct CoherenceCell {
  std::string id;
  ZigZag source;
  ZigZag target;
};

struct Ars2 {
  struct Rule {
    std::string id;
    int src = -1;
    int tgt = -1;
  };

  std::vector<std::string> objects;
  std::vector<Rule> rules;
  std::vector<CoherenceCell> cells;

  int add_object(const std::string& id) {
    objects.push_back(id);
    return static_cast<int>(objects.size()) - 1;
  }
  int add_rule(const std::string& id, int src, int tgt) {
    if (src < 0 || src >= static_cast<int>(objects.size()) || tgt < 0 ||
        tgt >= static_cast<int>(objects.size()))
      throw ContractError("rule endpoints must be declared objects");
    rules.push_back({id, src, tgt});
    return static_cast<int>(rules.size()) - 1;
  }

  std::optional<int> find_object(const std::string& id) const {
    for (size_t i = 0; i < objects.size(); ++i)
      if (objects[i] == id) return static_cast<int>(i);
    return std::nullopt;
  }
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

  int step_src(const SignedStep& s) const {
    return s.forward ? rules[s.rule].src : rules[s.rule].tgt;
  }
  int step_tgt(const SignedStep& s) const {
    return s.forward ? rules[s.rule].tgt : rules[s.rule].src;
  }

  bool well_composed(const ZigZag& z) const {
    int at = z.src;
    for (const SignedStep& s : z.steps) {
      if (s.rule < 0 || s.rule >= static_cast<int>(rules.size())) return false;
      if (step_src(s) != at) return false;
      at = step_tgt(s);
    }
    return true;
  }

  int target_of(const ZigZag& z) const {
    int at = z.src;
    for (const SignedStep& s : z.steps) at = step_tgt(s);
    return at;
  }

  bool parallel(const ZigZag& p, const ZigZag& q) const {
    return p.src == q.src && target_of(p) == target_of(q);
  }

  void add_cell(const std::string& id, ZigZag source, ZigZag target) {
    if (!well_composed(source) || !well_composed(target))
      throw ContractError("cell boundary not well-composed: " + id);
    if (!parallel(source, target))
      throw ContractError("cell boundaries not parallel: " + id);
    cells.push_back({id, std::move(source), std::move(target)});
  }
};

// A subset of the rules, kept as a membership mask for O(1) queries.
struct RuleSubset {
  std::vector<bool> member;

  static RuleSubset of(const Ars2& a, const std::vector<int>& rule_indices) {
    RuleSubset w;
    w.member.assign(a.rules.size(), false);
    for (int r : rule_indices) w.member.at(r) = true;
    return w;
  }
  static RuleSubset all(const Ars2& a) {
    RuleSubset w;
    w.member.assign(a.rules.size(), true);
    return w;
  }
  static RuleSubset none(const Ars2& a) {
    RuleSubset w;
    w.member.assign(a.rules.size(), false);
    return w;
  }
  bool contains(int rule) const { return rule >= 0 && rule < static_cast<int>(member.size()) && member[rule]; }
};

// ---------------------------------------------------------------------------
// Reduced zig-zags (Lemma: each congruence class has a unique reduced one).

inline ZigZag reduce_zigzag(const ZigZag& p) {
  ZigZag out;
  out.src = p.src;
  for (const SignedStep& s : p.steps) {
    if (!out.steps.empty() && out.steps.back().rule == s.rule &&
        out.steps.back().forward != s.forward) {
      out.steps.pop_back();
    } else {
      out.steps.push_back(s);
    }
  }
  return out;
}

inline ZigZag reverse_zigzag(const Ars2& a, const ZigZag& p) {
  ZigZag out;
  out.src = a.target_of(p);
  for (auto it = p.steps.rbegin(); it != p.steps.rend(); ++it)
    out.steps.push_back(it->reversed());
  return out;
}

inline ZigZag concat(const Ars2& a, const ZigZag& p, const ZigZag& q) {
  if (a.target_of(p) != q.src) throw ContractError("concat: endpoints do not chain");
  ZigZag out = p;
  out.steps.insert(out.steps.end(), q.steps.begin(), q.steps.end());
  return out;
}

// ---------------------------------------------------------------------------
// Termination and normalization.

inline bool is_w_terminating(const Ars2& a, const RuleSubset& w) {
  // Finite objects: termination is acyclicity of the W-step graph.
  int n = static_cast<int>(a.objects.size());
  std::vector<std::vector<int>> adj(n);
  for (size_t r = 0; r < a.rules.size(); ++r)
    if (w.contains(static_cast<int>(r))) adj[a.rules[r].src].push_back(a.rules[r].tgt);
  std::vector<int> state(n, 0);  // 0 unvisited, 1 on stack, 2 done
  std::vector<std::pair<int, size_t>> stack;
  for (int s = 0; s < n; ++s) {
    if (state[s]) continue;
    stack.push_back({s, 0});
    state[s] = 1;
    while (!stack.empty()) {
      auto& [x, i] = stack.back();
      if (i < adj[x].size()) {
        int y = adj[x][i++];
        if (state[y] == 1) return false;
        if (state[y] == 0) {
          state[y] = 1;
          stack.push_back({y, 0});
        }
      } else {
        state[x] = 2;
        stack.pop_back();
      }
    }
  }
  return true;
}

inline std::optional<int> first_w_step_from(const Ars2& a, const RuleSubset& w, int x) {
  for (size_t r = 0; r < a.rules.size(); ++r)
    if (w.contains(static_cast<int>(r)) && a.rules[r].src == x) return static_cast<int>(r);
  return std::nullopt;
}

inline bool is_w_normal(const Ars2& a, const RuleSubset& w, int x) {
  return !first_w_step_from(a, w, x).has_value();
}

struct BoundExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic normalization: always picks the least-indexed applicable
// W-rule. Returns the normal form and the forward path reaching it.
inline std::pair<int, ZigZag> normalize(const Ars2& a, const RuleSubset& w, int x,
                                        long step_bound = 1000000) {
  ZigZag path;
  path.src = x;
  int at = x;
  long steps = 0;
  while (auto r = first_w_step_from(a, w, at)) {
    if (++steps > step_bound)
      throw BoundExhausted("normalize: step bound exhausted at object " + a.objects[at]);
    path.steps.push_back({*r, true});
    at = a.rules[*r].tgt;
  }
  return {at, path};
}

inline std::vector<int> normal_forms(const Ars2& a, const RuleSubset& w) {
  std::vector<int> out;
  for (int x = 0; x < static_cast<int>(a.objects.size()); ++x)
    if (is_w_normal(a, w, x)) out.push_back(x);
  return out;
}

// Normalization choice n_x for every object; empty path on normal forms.
struct NormalizationChoice {
  std::vector<int> nf;        // per object, its W-normal form
  std::vector<ZigZag> path;   // per object, forward W-path to it

  static NormalizationChoice compute(const Ars2& a, const RuleSubset& w,
                                     long step_bound = 1000000) {
    NormalizationChoice n;
    n.nf.resize(a.objects.size());
    n.path.resize(a.objects.size());
    for (int x = 0; x < static_cast<int>(a.objects.size()); ++x) {
      auto [xf, p] = normalize(a, w, x, step_bound);
      n.nf[x] = xf;
      n.path[x] = p;
    }
    return n;
  }
};

// ---------------------------------------------------------------------------
// Coherence-equivalence search (the congruence generated by the cells).

struct CohMove {
  int cell = -1;
  bool source_to_target = true;  // replace the cell's source by its target
  bool reversed = false;         // the boundary occurs reversed inside the zig-zag
  bool insertion = false;        // splice the cell's boundary loop at an object
  size_t pos = 0;                // index into the host zig-zag's steps
};

struct CohSearchOutcome {
  bool proven = false;
  long explored = 0;
  long bound = 0;
  std::vector<CohMove> witness;
};

namespace detail {

inline std::string zz_key(const ZigZag& z) {
  std::string k = std::to_string(z.src);
  for (const SignedStep& s : z.steps) {
    k += s.forward ? '+' : '-';
    k += std::to_string(s.rule);
  }
  return k;
}

// Apply one elementary move: replace an occurrence of `from` (starting at
// step index pos) by `to`, then reduce. For empty `from`, pos is an insertion
// point and the object there must equal from.src (checked by caller).
inline ZigZag apply_replacement(const ZigZag& host, size_t pos, size_t len,
                                const std::vector<SignedStep>& to) {
  ZigZag out;
  out.src = host.src;
  out.steps.assign(host.steps.begin(), host.steps.begin() + pos);
  out.steps.insert(out.steps.end(), to.begin(), to.end());
  out.steps.insert(out.steps.end(), host.steps.begin() + pos + len, host.steps.end());
  return reduce_zigzag(out);
}

struct CellVariant {
  int cell;
  bool source_to_target;
  bool reversed;
  bool insertion;
  std::vector<SignedStep> from;
  std::vector<SignedStep> to;
  int from_src;  // object at the start of `from` (needed for empty `from`)
};

inline std::vector<CellVariant> cell_variants(const Ars2& a) {
  std::vector<CellVariant> vs;
  for (size_t c = 0; c < a.cells.size(); ++c) {
    ZigZag s = reduce_zigzag(a.cells[c].source);
    ZigZag t = reduce_zigzag(a.cells[c].target);
    ZigZag sr = reduce_zigzag(reverse_zigzag(a, s));
    ZigZag tr = reduce_zigzag(reverse_zigzag(a, t));
    int ci = static_cast<int>(c);
    int src_obj = s.src;
    int tgt_obj = a.target_of(s);
    vs.push_back({ci, true, false, false, s.steps, t.steps, s.src});
    vs.push_back({ci, false, false, false, t.steps, s.steps, t.src});
    // Reversed occurrences: p => q entails p^- equivalent to q^-.
    vs.push_back({ci, true, true, false, sr.steps, tr.steps, sr.src});
    vs.push_back({ci, false, true, false, tr.steps, sr.steps, tr.src});
    // Boundary-loop insertions: source equivalent to target makes the
    // composite loops equivalent to identities, so they may be spliced in at
    // any matching object.
    auto loop = [&](const ZigZag& first, const ZigZag& second) {
      ZigZag z = first;
      z.steps.insert(z.steps.end(), second.steps.begin(), second.steps.end());
      return reduce_zigzag(z).steps;
    };
    vs.push_back({ci, true, false, true, {}, loop(sr, t), tgt_obj});
    vs.push_back({ci, false, false, true, {}, loop(tr, s), tgt_obj});
    vs.push_back({ci, true, true, true, {}, loop(s, tr), src_obj});
    vs.push_back({ci, false, true, true, {}, loop(t, sr), src_obj});
  }
  return vs;
}

}  // namespace detail

// Breadth-first search for p cohto-equivalent q over reduced zig-zags.
// Elementary moves replace a cell boundary occurrence (either direction,
// possibly reversed) at any position, or splice a cell's boundary loop in at
// a matching object; cancellable pairs are only introduced as part of a cell
// match. An unproven outcome is not a disproof.
inline CohSearchOutcome cohto_equivalent(const Ars2& a, const ZigZag& p, const ZigZag& q,
                                         long bound = 10000) {
  if (!a.well_composed(p) || !a.well_composed(q))
    throw ContractError("cohto_equivalent: ill-composed zig-zag");
  if (!a.parallel(p, q)) throw ContractError("cohto_equivalent: zig-zags not parallel");

  CohSearchOutcome out;
  out.bound = bound;
  ZigZag start = reduce_zigzag(p);
  ZigZag goal = reduce_zigzag(q);
  std::string goal_key = detail::zz_key(goal);

  std::unordered_map<std::string, std::pair<std::string, CohMove>> parent;
  std::string start_key = detail::zz_key(start);
  if (start_key == goal_key) {
    out.proven = true;
    return out;
  }
  auto variants = detail::cell_variants(a);
  // Index variants by the first step of their match pattern (or, for empty
  // patterns, by the object at the insertion point) to avoid a full scan.
  std::unordered_map<long, std::vector<size_t>> by_first_step;
  std::unordered_map<int, std::vector<size_t>> by_object;
  for (size_t i = 0; i < variants.size(); ++i) {
    if (variants[i].from.empty())
      by_object[variants[i].from_src].push_back(i);
    else
      by_first_step[variants[i].from[0].rule * 2 + (variants[i].from[0].forward ? 1 : 0)]
          .push_back(i);
  }

  // Best-first by zig-zag length (FIFO within a length) so that short
  // candidates are tried before insertion-lengthened ones.
  std::vector<ZigZag> store{start};
  std::priority_queue<std::pair<size_t, size_t>, std::vector<std::pair<size_t, size_t>>,
                      std::greater<>>
      frontier;
  frontier.push({start.steps.size(), 0});
  std::unordered_set<std::string> seen{start_key};
  out.explored = 1;

  while (!frontier.empty()) {
    ZigZag z = store[frontier.top().second];
    frontier.pop();
    std::string zk = detail::zz_key(z);

    // Objects along z, for empty-boundary insertion points.
    std::vector<int> at(z.steps.size() + 1);
    at[0] = z.src;
    for (size_t i = 0; i < z.steps.size(); ++i) at[i + 1] = a.step_tgt(z.steps[i]);

    std::vector<std::pair<size_t, size_t>> candidates;  // (variant index, pos)
    for (size_t pos = 0; pos <= z.steps.size(); ++pos) {
      if (auto it = by_object.find(at[pos]); it != by_object.end())
        for (size_t vi : it->second) candidates.push_back({vi, pos});
      if (pos < z.steps.size()) {
        long key = z.steps[pos].rule * 2 + (z.steps[pos].forward ? 1 : 0);
        if (auto it = by_first_step.find(key); it != by_first_step.end())
          for (size_t vi : it->second) candidates.push_back({vi, pos});
      }
    }
    for (auto [vi, pos] : candidates) {
      const auto& v = variants[vi];
      size_t len = v.from.size();
      {
        if (pos + len > z.steps.size() + (len == 0 ? 1 : 0)) continue;
        if (len > 0 && !std::equal(v.from.begin(), v.from.end(), z.steps.begin() + pos)) continue;
        ZigZag nz = detail::apply_replacement(z, pos, len, v.to);
        std::string nk = detail::zz_key(nz);
        if (seen.count(nk)) continue;
        seen.insert(nk);
        parent[nk] = {zk, CohMove{v.cell, v.source_to_target, v.reversed, v.insertion, pos}};
        if (nk == goal_key) {
          // Reconstruct the witness.
          std::vector<CohMove> moves;
          std::string cur = nk;
          while (cur != start_key) {
            auto& [pk, mv] = parent[cur];
            moves.push_back(mv);
            cur = pk;
          }
          std::reverse(moves.begin(), moves.end());
          out.proven = true;
          out.witness = std::move(moves);
          out.explored = static_cast<long>(seen.size());
          return out;
        }
        if (static_cast<long>(seen.size()) >= bound) {
          out.explored = static_cast<long>(seen.size());
          return out;
        }
        frontier.push({nz.steps.size(), store.size()});
        store.push_back(std::move(nz));
      }
    }
  }
  out.explored = static_cast<long>(seen.size());
  return out;
}

// Replay a witness from p; returns the resulting reduced zig-zag.
inline ZigZag replay_witness(const Ars2& a, const ZigZag& p,
                             const std::vector<CohMove>& witness) {
  auto variants = detail::cell_variants(a);
  ZigZag z = reduce_zigzag(p);
  for (const CohMove& m : witness) {
    const detail::CellVariant* v = nullptr;
    for (const auto& cand : variants)
      if (cand.cell == m.cell && cand.source_to_target == m.source_to_target &&
          cand.reversed == m.reversed && cand.insertion == m.insertion) {
        v = &cand;
        break;
      }
    if (!v) throw ContractError("replay: unknown move");
    size_t len = v->from.size();
    if (m.pos + len > z.steps.size() + (len == 0 ? 1 : 0))
      throw ContractError("replay: move position out of range");
    if (len == 0) {
      std::vector<int> at(z.steps.size() + 1);
      at[0] = z.src;
      for (size_t i = 0; i < z.steps.size(); ++i) at[i + 1] = a.step_tgt(z.steps[i]);
      if (at[m.pos] != v->from_src) throw ContractError("replay: insertion object mismatch");
    } else if (!std::equal(v->from.begin(), v->from.end(), z.steps.begin() + m.pos)) {
      throw ContractError("replay: boundary does not match");
    }
    z = detail::apply_replacement(z, m.pos, len, v->to);
  }
  return z;
}

// ---------------------------------------------------------------------------
// Local confluence with coherent fillings.

struct BranchingRecord {
  int left_rule = -1;
  int right_rule = -1;
  int source = -1;
  bool joinable = false;
  bool filled = false;
  ZigZag left_completion;   // forward W-path from the left target
  ZigZag right_completion;  // forward W-path from the right target
  CohSearchOutcome filling;
};

struct ConfluenceReport {
  std::vector<BranchingRecord> branchings;
  bool all_filled() const {
    for (const auto& b : branchings)
      if (!b.filled) return false;
    return true;
  }
};

inline std::vector<std::pair<int, int>> local_w_branchings(const Ars2& a, const RuleSubset& w) {
  std::vector<std::pair<int, int>> out;
  for (size_t r1 = 0; r1 < a.rules.size(); ++r1) {
    if (!w.contains(static_cast<int>(r1))) continue;
    for (size_t r2 = r1 + 1; r2 < a.rules.size(); ++r2) {
      if (!w.contains(static_cast<int>(r2))) continue;
      if (a.rules[r1].src == a.rules[r2].src)
        out.push_back({static_cast<int>(r1), static_cast<int>(r2)});
    }
  }
  return out;
}

namespace detail {

// Forward W-paths from x, breadth-first, one (shortest, deterministic) path
// per reachable object.
inline std::map<int, ZigZag> w_descendants(const Ars2& a, const RuleSubset& w, int x,
                                           long node_bound = 100000) {
  std::map<int, ZigZag> paths;
  ZigZag e;
  e.src = x;
  paths[x] = e;
  std::deque<int> frontier{x};
  while (!frontier.empty() && static_cast<long>(paths.size()) < node_bound) {
    int y = frontier.front();
    frontier.pop_front();
    for (size_t r = 0; r < a.rules.size(); ++r) {
      if (!w.contains(static_cast<int>(r)) || a.rules[r].src != y) continue;
      int z = a.rules[r].tgt;
      if (paths.count(z)) continue;
      ZigZag p = paths[y];
      p.steps.push_back({static_cast<int>(r), true});
      paths[z] = p;
      frontier.push_back(z);
    }
  }
  return paths;
}

}  // namespace detail

inline BranchingRecord check_branching(const Ars2& a, const RuleSubset& w, int r1, int r2,
                                       long bound) {
  BranchingRecord rec;
  rec.left_rule = r1;
  rec.right_rule = r2;
  rec.source = a.rules[r1].src;
  int y1 = a.rules[r1].tgt;
  int y2 = a.rules[r2].tgt;
  auto d1 = detail::w_descendants(a, w, y1);
  auto d2 = detail::w_descendants(a, w, y2);

  // Candidate cospans, cheapest first.
  std::vector<int> common;
  for (const auto& [z, p] : d1)
    if (d2.count(z)) common.push_back(z);
  std::sort(common.begin(), common.end(), [&](int u, int v) {
    return d1[u].length() + d2[u].length() < d1[v].length() + d2[v].length();
  });

  for (int z : common) {
    rec.joinable = true;
    ZigZag left;
    left.src = rec.source;
    left.steps.push_back({r1, true});
    left = concat(a, left, d1[z]);
    ZigZag right;
    right.src = rec.source;
    right.steps.push_back({r2, true});
    right = concat(a, right, d2[z]);
    CohSearchOutcome res = cohto_equivalent(a, left, right, bound);
    if (res.proven) {
      rec.filled = true;
      rec.left_completion = d1[z];
      rec.right_completion = d2[z];
      rec.filling = std::move(res);
      return rec;
    }
    if (rec.filling.explored == 0) rec.filling = std::move(res);
  }
  return rec;
}

inline ConfluenceReport check_local_w_confluence(const Ars2& a, const RuleSubset& w,
                                                 long bound = 10000) {
  ConfluenceReport report;
  for (auto [r1, r2] : local_w_branchings(a, w))
    report.branchings.push_back(check_branching(a, w, r1, r2, bound));
  return report;
}

enum class ConfluenceVerdict { Confluent, NotTerminating, NotLocallyConfluentWithinBound };

struct NewmanResult {
  ConfluenceVerdict verdict;
  ConfluenceReport local;
  std::string inference;  // the reasoning chain for the report
};

inline NewmanResult check_w_confluence_by_newman(const Ars2& a, const RuleSubset& w,
                                                 long bound = 10000) {
  NewmanResult res;
  if (!is_w_terminating(a, w)) {
    res.verdict = ConfluenceVerdict::NotTerminating;
    res.inference = "not W-terminating (cycle in the W-step graph)";
    return res;
  }
  res.local = check_local_w_confluence(a, w, bound);
  if (res.local.all_filled()) {
    res.verdict = ConfluenceVerdict::Confluent;
    res.inference = "W-terminating and locally W-confluent, hence W-confluent (Newman)";
  } else {
    res.verdict = ConfluenceVerdict::NotLocallyConfluentWithinBound;
    res.inference = "some local W-branching has no filling within the bound";
  }
  return res;
}

// ---------------------------------------------------------------------------
// Church-Rosser transport: under W-convergence, every W-zig-zag p : x ~> y
// satisfies x^ = y^ and p . n_y cohto n_x.

struct TransportResult {
  bool proven = false;
  bool normal_forms_agree = false;
  int nf_left = -1, nf_right = -1;
  CohSearchOutcome search;
};

inline TransportResult church_rosser_transport(const Ars2& a, const RuleSubset& w,
                                               const NormalizationChoice& n, const ZigZag& p,
                                               long bound = 10000) {
  for (const SignedStep& s : p.steps)
    if (!w.contains(s.rule)) throw ContractError("transport: zig-zag leaves W");
  TransportResult res;
  int x = p.src;
  int y = a.target_of(p);
  res.nf_left = n.nf[x];
  res.nf_right = n.nf[y];
  res.normal_forms_agree = (res.nf_left == res.nf_right);
  if (!res.normal_forms_agree) return res;  // counterexample to confluence
  ZigZag lhs = concat(a, p, n.path[y]);
  res.search = cohto_equivalent(a, lhs, n.path[x], bound);
  res.proven = res.search.proven;
  return res;
}

// ---------------------------------------------------------------------------
// W-coherence.

enum class CoherenceVerdict { Coherent, CounterexampleFound, UndeterminedWithinBound };

struct CoherenceResult {
  CoherenceVerdict verdict;
  std::string inference;
  // When a counterexample is found: the two parallel W-zig-zags.
  ZigZag counter_left, counter_right;
};

namespace detail {

// All reduced W-zig-zags of length <= len from every object.
inline std::vector<ZigZag> enumerate_w_zigzags(const Ars2& a, const RuleSubset& w, int len) {
  std::vector<ZigZag> all;
  for (int x = 0; x < static_cast<int>(a.objects.size()); ++x) {
    ZigZag e;
    e.src = x;
    all.push_back(e);
  }
  size_t begin = 0;
  for (int l = 0; l < len; ++l) {
    size_t end = all.size();
    for (size_t i = begin; i < end; ++i) {
      ZigZag z = all[i];
      int y = a.target_of(z);
      for (size_t r = 0; r < a.rules.size(); ++r) {
        if (!w.contains(static_cast<int>(r))) continue;
        for (bool fwd : {true, false}) {
          SignedStep s{static_cast<int>(r), fwd};
          if (a.step_src(s) != y) continue;
          if (!z.steps.empty() && z.steps.back().rule == s.rule &&
              z.steps.back().forward != s.forward)
            continue;  // keep reduced
          ZigZag nz = z;
          nz.steps.push_back(s);
          all.push_back(std::move(nz));
        }
      }
    }
    begin = end;
  }
  return all;
}

}  // namespace detail

inline CoherenceResult check_w_coherence(const Ars2& a, const RuleSubset& w, long length_bound = 4,
                                         long search_bound = 10000) {
  CoherenceResult res;
  NewmanResult newman = check_w_confluence_by_newman(a, w, search_bound);
  if (newman.verdict == ConfluenceVerdict::Confluent) {
    res.verdict = CoherenceVerdict::Coherent;
    res.inference = "W-convergent, hence W-coherent (coherent Newman + Church-Rosser)";
    return res;
  }
  // Fallback: exhaustive check of parallel W-zig-zag pairs up to the bound.
  auto all = detail::enumerate_w_zigzags(a, w, length_bound);
  std::map<std::pair<int, int>, std::vector<size_t>> by_endpoints;
  for (size_t i = 0; i < all.size(); ++i)
    by_endpoints[{all[i].src, a.target_of(all[i])}].push_back(i);
  for (const auto& [ends, idxs] : by_endpoints) {
    for (size_t i = 0; i + 1 < idxs.size(); ++i) {
      CohSearchOutcome o = cohto_equivalent(a, all[idxs[i]], all[idxs[i + 1]], search_bound);
      if (!o.proven) {
        res.verdict = CoherenceVerdict::CounterexampleFound;
        res.inference = "parallel W-zig-zags not provably equivalent within bound";
        res.counter_left = all[idxs[i]];
        res.counter_right = all[idxs[i + 1]];
        return res;
      }
    }
  }
  res.verdict = CoherenceVerdict::Coherent;
  res.inference = "all parallel W-zig-zag pairs up to the length bound are equivalent";
  return res;
}

// ---------------------------------------------------------------------------
// Quotient by a rigid W-subgroupoid (requires certified W-convergence).

struct QuotientPresentation {
  std::vector<int> class_of;        // object -> class index
  std::vector<int> representative;  // class index -> representative object (the normal form)
  NormalizationChoice n;
};

inline QuotientPresentation quotient_by_rigid(const Ars2& a, const RuleSubset& w,
                                              long bound = 10000) {
  NewmanResult newman = check_w_confluence_by_newman(a, w, bound);
  if (newman.verdict != ConfluenceVerdict::Confluent)
    throw ContractError("quotient_by_rigid: W-convergence (hence rigidity) not certified");
  QuotientPresentation q;
  q.n = NormalizationChoice::compute(a, w);
  q.class_of.assign(a.objects.size(), -1);
  std::map<int, int> class_of_nf;
  for (int x = 0; x < static_cast<int>(a.objects.size()); ++x) {
    int nf = q.n.nf[x];
    auto it = class_of_nf.find(nf);
    if (it == class_of_nf.end()) {
      int c = static_cast<int>(q.representative.size());
      q.representative.push_back(nf);
      class_of_nf[nf] = c;
      q.class_of[x] = c;
    } else {
      q.class_of[x] = it->second;
    }
  }
  return q;
}

// The representative of a morphism f : x -> y in the quotient: the reduced
// zig-zag n_x^- . f . n_y from x^ to y^.
inline ZigZag quotient_morphism_rep(const Ars2& a, const QuotientPresentation& q,
                                    const ZigZag& f) {
  int x = f.src;
  int y = a.target_of(f);
  ZigZag rep = reverse_zigzag(a, q.n.path[x]);
  rep = concat(a, rep, f);
  rep = concat(a, rep, q.n.path[y]);
  return reduce_zigzag(rep);
}

// ---------------------------------------------------------------------------
// Restriction to normal forms (P \ W).

inline Ars2 restrict_to_normal_forms(const Ars2& a, const RuleSubset& w) {
  Ars2 out;
  std::vector<int> obj_map(a.objects.size(), -1);
  for (int x = 0; x < static_cast<int>(a.objects.size()); ++x)
    if (is_w_normal(a, w, x)) obj_map[x] = out.add_object(a.objects[x]);
  std::vector<int> rule_map(a.rules.size(), -1);
  for (size_t r = 0; r < a.rules.size(); ++r) {
    const auto& rule = a.rules[r];
    if (obj_map[rule.src] >= 0 && obj_map[rule.tgt] >= 0)
      rule_map[r] = out.add_rule(rule.id, obj_map[rule.src], obj_map[rule.tgt]);
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
  for (const auto& c : a.cells) {
    ZigZag s, t;
    if (remap(c.source, s) && remap(c.target, t)) out.add_cell(c.id, s, t);
  }
  return out;
}

// Conditions for P \ W to present the category of normal forms, checked via
// the local criteria (single W-step squares).
struct NfRestrictionReport {
  bool convergence = false;
  std::vector<int> condition2_failures;                    // offending rules
  std::vector<std::pair<int, int>> condition3_failures;    // (rule, w-step)
  std::vector<std::pair<int, int>> condition4_failures;    // (cell, w-step)
  bool all_pass() const {
    return convergence && condition2_failures.empty() && condition3_failures.empty() &&
           condition4_failures.empty();
  }
};

namespace detail {

// Paths (over all rules) from x, breadth-first, all reachable objects.
inline std::map<int, ZigZag> descendants_all(const Ars2& a, int x, int len_bound) {
  std::map<int, ZigZag> paths;
  ZigZag e;
  e.src = x;
  paths[x] = e;
  std::deque<std::pair<int, int>> frontier{{x, 0}};
  while (!frontier.empty()) {
    auto [y, d] = frontier.front();
    frontier.pop_front();
    if (d >= len_bound) continue;
    for (size_t r = 0; r < a.rules.size(); ++r) {
      if (a.rules[r].src != y) continue;
      int z = a.rules[r].tgt;
      if (paths.count(z)) continue;
      ZigZag p = paths[y];
      p.steps.push_back({static_cast<int>(r), true});
      paths[z] = p;
      frontier.push_back({z, d + 1});
    }
  }
  return paths;
}

// Search a completion square for path `top` : x ~> y against the single
// W-step w0 : x -> x': find p : x' ~> y' (all rules) and w' : y ~> y' (in W)
// with top . w' cohto w0 . p. Returns the pair if found.
inline std::optional<std::pair<ZigZag, ZigZag>> complete_square(
    const Ars2& a, const RuleSubset& w, const ZigZag& top, int w0, long bound, int len_bound) {
  int xp = a.rules[w0].tgt;
  int y = a.target_of(top);
  auto from_xp = descendants_all(a, xp, len_bound);
  auto from_y = w_descendants(a, w, y);
  std::vector<int> common;
  for (const auto& [z, p] : from_xp)
    if (from_y.count(z)) common.push_back(z);
  std::sort(common.begin(), common.end(), [&](int u, int v) {
    return from_xp[u].length() + from_y[u].length() < from_xp[v].length() + from_y[v].length();
  });
  for (int yp : common) {
    ZigZag lhs = concat(a, top, from_y[yp]);
    ZigZag w0z;
    w0z.src = top.src;
    w0z.steps.push_back({w0, true});
    ZigZag rhs = concat(a, w0z, from_xp[yp]);
    if (cohto_equivalent(a, lhs, rhs, bound).proven)
      return std::make_pair(from_xp[yp], from_y[yp]);
  }
  return std::nullopt;
}

}  // namespace detail

inline NfRestrictionReport check_nf_restriction_conditions(const Ars2& a, const RuleSubset& w,
                                                           long bound = 10000,
                                                           int len_bound = 6) {
  NfRestrictionReport rep;
  rep.convergence =
      check_w_confluence_by_newman(a, w, bound).verdict == ConfluenceVerdict::Confluent;

  // Condition 2: rules with W-normal source have W-normal target.
  for (size_t r = 0; r < a.rules.size(); ++r)
    if (is_w_normal(a, w, a.rules[r].src) && !is_w_normal(a, w, a.rules[r].tgt))
      rep.condition2_failures.push_back(static_cast<int>(r));

  // Condition 3 (local): every coinitial (rule, single W-step) pair closes.
  for (size_t r = 0; r < a.rules.size(); ++r) {
    for (size_t ws = 0; ws < a.rules.size(); ++ws) {
      if (!w.contains(static_cast<int>(ws)) || r == ws) continue;
      if (a.rules[r].src != a.rules[ws].src) continue;
      ZigZag top;
      top.src = a.rules[r].src;
      top.steps.push_back({static_cast<int>(r), true});
      if (!detail::complete_square(a, w, top, static_cast<int>(ws), bound, len_bound))
        rep.condition3_failures.push_back({static_cast<int>(r), static_cast<int>(ws)});
    }
  }

  // Condition 4 (local): for every cell and coinitial single W-step, the two
  // completions are themselves equivalent.
  for (size_t c = 0; c < a.cells.size(); ++c) {
    const auto& cell = a.cells[c];
    for (size_t ws = 0; ws < a.rules.size(); ++ws) {
      if (!w.contains(static_cast<int>(ws))) continue;
      if (a.rules[ws].src != cell.source.src) continue;
      auto cp = detail::complete_square(a, w, cell.source, static_cast<int>(ws), bound, len_bound);
      auto cq = detail::complete_square(a, w, cell.target, static_cast<int>(ws), bound, len_bound);
      bool ok = false;
      if (cp && cq) {
        ZigZag pprime = cp->first;
        ZigZag qprime = cq->first;
        if (a.target_of(pprime) == a.target_of(qprime))
          ok = cohto_equivalent(a, pprime, qprime, bound).proven;
      }
      if (!ok) rep.condition4_failures.push_back({static_cast<int>(c), static_cast<int>(ws)});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Tietze transformations.

// (T1) add a definable rule: a new rule x -> y together with a defining cell
// relating it to the given zig-zag p : x ~> y.
inline Ars2 tietze_add_rule(const Ars2& a, const ZigZag& p, const std::string& rule_id,
                            const std::string& cell_id) {
  if (!a.well_composed(p)) throw ContractError("tietze_add_rule: ill-composed zig-zag");
  Ars2 out = a;
  int r = out.add_rule(rule_id, p.src, a.target_of(p));
  ZigZag lhs;
  lhs.src = p.src;
  lhs.steps.push_back({r, true});
  out.add_cell(cell_id, lhs, p);
  return out;
}

// (T2) add a provable cell.
inline Ars2 tietze_add_cell(const Ars2& a, const ZigZag& p, const ZigZag& q,
                            const CohSearchOutcome& proof, const std::string& cell_id) {
  if (!proof.proven) throw ContractError("tietze_add_cell: proof outcome is not Proven");
  ZigZag check = replay_witness(a, p, proof.witness);
  if (!(check == reduce_zigzag(q)))
    throw ContractError("tietze_add_cell: witness does not replay from p to q");
  Ars2 out = a;
  out.add_cell(cell_id, p, q);
  return out;
}

// Remove a rule via a cell A : p1 . a . p2 => q in which the rule occurs
// exactly once in the source and not in the target. Every other occurrence
// of the rule is replaced by p1^- . q . p2^-.
inline Ars2 tietze_remove_rule(const Ars2& a, int rule, int cell) {
  const CoherenceCell& c = a.cells.at(cell);
  int count = 0;
  size_t at = 0;
  for (size_t i = 0; i < c.source.steps.size(); ++i)
    if (c.source.steps[i].rule == rule) {
      ++count;
      at = i;
    }
  if (count != 1 || !c.source.steps[at].forward)
    throw ContractError("tietze_remove_rule: rule must occur exactly once, forward, in the cell source");
  for (const SignedStep& s : c.target.steps)
    if (s.rule == rule) throw ContractError("tietze_remove_rule: rule occurs in the cell target");

  // Replacement zig-zag for a: p1^- . q . p2^-.
  ZigZag p1;
  p1.src = c.source.src;
  p1.steps.assign(c.source.steps.begin(), c.source.steps.begin() + at);
  ZigZag p2;
  p2.src = a.step_tgt(c.source.steps[at]);
  p2.steps.assign(c.source.steps.begin() + at + 1, c.source.steps.end());
  ZigZag repl = reverse_zigzag(a, p1);
  repl = concat(a, repl, c.target);
  repl = concat(a, repl, reverse_zigzag(a, p2));

  Ars2 out;
  out.objects = a.objects;
  std::vector<int> rule_map(a.rules.size(), -1);
  for (size_t r = 0; r < a.rules.size(); ++r)
    if (static_cast<int>(r) != rule)
      rule_map[r] = out.add_rule(a.rules[r].id, a.rules[r].src, a.rules[r].tgt);

  auto rewrite = [&](const ZigZag& z) {
    ZigZag nz;
    nz.src = z.src;
    for (const SignedStep& s : z.steps) {
      if (s.rule == rule) {
        if (s.forward) {
          for (const SignedStep& t : repl.steps) nz.steps.push_back({rule_map[t.rule], t.forward});
        } else {
          for (auto it = repl.steps.rbegin(); it != repl.steps.rend(); ++it)
            nz.steps.push_back({rule_map[it->rule], !it->forward});
        }
      } else {
        nz.steps.push_back({rule_map[s.rule], s.forward});
      }
    }
    return reduce_zigzag(nz);
  };
  for (size_t i = 0; i < a.cells.size(); ++i) {
    if (static_cast<int>(i) == cell) continue;
    out.add_cell(a.cells[i].id, rewrite(a.cells[i].source), rewrite(a.cells[i].target));
  }
  return out;
}

}  // namespace cohrw
