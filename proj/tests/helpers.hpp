#pragma once

// Shared generators for the randomized suites.

#include <random>
#include <string>

#include "cohrw/ars.hpp"

namespace cohrw_test {

using namespace cohrw;

// Random acyclic ARS on n objects in which every local branching is
// completed by a cospan plus a dedicated filling cell.
inline Ars2 random_completed_ars(std::mt19937& rng, int n, double density = 0.4) {
  Ars2 a;
  for (int i = 0; i < n; ++i) a.add_object("o" + std::to_string(i));
  int sink = n - 1;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::set<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng) < density) edges.insert({i, j});

  // Join every branching through the sink when needed.
  auto has_common_descendant = [&](int y1, int y2) {
    auto reach = [&](int s) {
      std::set<int> r{s};
      bool grew = true;
      while (grew) {
        grew = false;
        for (auto [u, v] : edges)
          if (r.count(u) && !r.count(v)) {
            r.insert(v);
            grew = true;
          }
      }
      return r;
    };
    std::set<int> r1 = reach(y1), r2 = reach(y2);
    for (int x : r1)
      if (r2.count(x)) return true;
    return false;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::pair<int, int>> es(edges.begin(), edges.end());
    for (size_t i = 0; i < es.size(); ++i)
      for (size_t j = i + 1; j < es.size(); ++j) {
        if (es[i].first != es[j].first) continue;
        int y1 = es[i].second, y2 = es[j].second;
        if (has_common_descendant(y1, y2)) continue;
        if (y1 != sink && !edges.count({y1, sink})) {
          edges.insert({y1, sink});
          changed = true;
        }
        if (y2 != sink && !edges.count({y2, sink})) {
          edges.insert({y2, sink});
          changed = true;
        }
      }
  }
  for (auto [u, v] : edges)
    a.add_rule("r" + std::to_string(u) + "_" + std::to_string(v), u, v);

  // One filling cell per local branching, over the paths the checker finds.
  RuleSubset all = RuleSubset::all(a);
  int cell_id = 0;
  for (auto [r1, r2] : local_w_branchings(a, all)) {
    int y1 = a.rules[r1].tgt, y2 = a.rules[r2].tgt;
    auto d1 = detail::w_descendants(a, all, y1);
    auto d2 = detail::w_descendants(a, all, y2);
    int best = -1;
    size_t best_len = SIZE_MAX;
    for (const auto& [z, p] : d1) {
      if (!d2.count(z)) continue;
      size_t len = p.length() + d2[z].length();
      if (len < best_len) {
        best_len = len;
        best = z;
      }
    }
    if (best < 0) continue;  // should not happen by construction
    ZigZag left;
    left.src = a.rules[r1].src;
    left.steps.push_back({r1, true});
    left = concat(a, left, d1[best]);
    ZigZag right;
    right.src = a.rules[r2].src;
    right.steps.push_back({r2, true});
    right = concat(a, right, d2[best]);
    a.add_cell("c" + std::to_string(cell_id++), left, right);
  }
  return a;
}

// Random well-composed zig-zag starting anywhere.
inline ZigZag random_zigzag(std::mt19937& rng, const Ars2& a, int len) {
  ZigZag z;
  z.src = static_cast<int>(rng() % a.objects.size());
  int at = z.src;
  for (int i = 0; i < len; ++i) {
    std::vector<SignedStep> options;
    for (size_t r = 0; r < a.rules.size(); ++r) {
      if (a.rules[r].src == at) options.push_back({static_cast<int>(r), true});
      if (a.rules[r].tgt == at) options.push_back({static_cast<int>(r), false});
    }
    if (options.empty()) break;
    SignedStep s = options[rng() % options.size()];
    z.steps.push_back(s);
    at = a.step_tgt(s);
  }
  return z;
}

}  // namespace cohrw_test
