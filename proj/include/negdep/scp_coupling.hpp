// Copyright 2026 The negdep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NEGDEP_SCP_COUPLING_HPP
#define NEGDEP_SCP_COUPLING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "negdep/core.hpp"
#include "negdep/max_flow.hpp"

namespace negdep {

/// Joint law of (Y, Z) supported on pairs with Y = Z or Y = Z + one element.
struct CoveringCoupling {
  struct Entry {
    Mask y = 0;
    Mask z = 0;
    double mass = 0.0;
  };
  std::size_t n = 0;
  std::vector<Entry> joint;

  std::map<Mask, double> marginal_y() const {
    std::map<Mask, double> out;
    for (const auto& e : joint) out[e.y] += e.mass;
    return out;
  }
  std::map<Mask, double> marginal_z() const {
    std::map<Mask, double> out;
    for (const auto& e : joint) out[e.z] += e.mass;
    return out;
  }
};

inline bool covers_pair(Mask y, Mask z) { return y == z || ((z & ~y) == 0 && popcount(y ^ z) == 1); }

/// Hall-type certificate: the Z-atoms in `blocked` carry more mass than all Y-atoms able to
/// cover any of them.
struct CutWitness {
  std::vector<Mask> blocked;
  double blocked_mass = 0.0;
  std::vector<Mask> neighbours;
  double neighbour_mass = 0.0;
  double deficit = 0.0;
};

inline constexpr std::size_t kMaxCoveringDimension = 12;
inline constexpr std::int64_t kFlowUnits = 1'000'000'000'000;  // 1e-12 resolution
inline constexpr std::int64_t kFlowSlackUnits = 50;             // 5e-11 unrouted mass accepted

namespace detail {

// Largest-remainder rounding of the law to exactly kFlowUnits.
inline std::vector<std::pair<Mask, std::int64_t>> integer_masses(const BernoulliLaw& law) {
  std::vector<std::pair<Mask, std::int64_t>> out;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::int64_t assigned = 0;
  law.for_each([&](Mask m, double p) {
    const double scaled = p * static_cast<double>(kFlowUnits);
    const auto base = static_cast<std::int64_t>(std::floor(scaled));
    remainders.push_back({scaled - static_cast<double>(base), out.size()});
    out.push_back({m, base});
    assigned += base;
  });
  std::stable_sort(remainders.begin(), remainders.end(), [](auto& a, auto& b) { return a.first > b.first; });
  std::int64_t missing = kFlowUnits - assigned;
  for (std::size_t t = 0; missing != 0 && !remainders.empty(); t = (t + 1) % remainders.size()) {
    auto& slot = out[remainders[t].second].second;
    if (missing > 0) {
      ++slot;
      --missing;
    } else if (slot > 0) {
      --slot;
      ++missing;
    }
  }
  return out;
}

}  // namespace detail

/// Decides whether Y stochastically covers Z by an integer transportation feasibility solve.
/// Holds with an explicit coupling; fails with a cut certificate.
inline Verdict<CutWitness> covering_feasible(const BernoulliLaw& law_y, const BernoulliLaw& law_z,
                                             CoveringCoupling* coupling = nullptr) {
  if (law_y.n() != law_z.n()) throw Error(ErrorCode::DimensionMismatch, "laws have different dimensions");
  if (law_y.n() > kMaxCoveringDimension)
    throw Error(ErrorCode::DimensionTooLarge, "covering check is limited to n <= 12");
  const auto ys = detail::integer_masses(law_y);
  const auto zs = detail::integer_masses(law_z);
  const std::size_t source = ys.size() + zs.size(), sink = source + 1;
  std::map<Mask, std::size_t> z_index;
  for (std::size_t b = 0; b < zs.size(); ++b) z_index[zs[b].first] = b;

  MaxFlow<std::int64_t> flow(sink + 1);
  for (std::size_t a = 0; a < ys.size(); ++a) flow.add_edge(source, a, ys[a].second);
  for (std::size_t b = 0; b < zs.size(); ++b) flow.add_edge(ys.size() + b, sink, zs[b].second);
  struct Arc {
    std::size_t a, b, id;
  };
  std::vector<Arc> arcs;
  for (std::size_t a = 0; a < ys.size(); ++a) {
    const Mask y = ys[a].first;
    auto link = [&](Mask z) {
      auto it = z_index.find(z);
      if (it != z_index.end())
        arcs.push_back({a, it->second, flow.add_edge(a, ys.size() + it->second, MaxFlow<std::int64_t>::infinite())});
    };
    link(y);
    for (std::size_t k = 0; k < law_y.n(); ++k)
      if (has_bit(y, k)) link(y & ~(Mask{1} << k));
  }
  const std::int64_t routed = flow.solve(source, sink);

  Verdict<CutWitness> v;
  v.budget_spent = {{"y_atoms", ys.size()}, {"z_atoms", zs.size()}, {"arcs", arcs.size()}};
  if (kFlowUnits - routed <= kFlowSlackUnits) {
    v.status = Status::holds;
    if (coupling) {
      coupling->n = law_y.n();
      coupling->joint.clear();
      for (const auto& arc : arcs)
        if (auto f = flow.flow_on(arc.id); f > 0)
          coupling->joint.push_back({ys[arc.a].first, zs[arc.b].first, static_cast<double>(f) / kFlowUnits});
    }
    if (routed != kFlowUnits) v.notes.push_back("unrouted mass " + std::to_string(kFlowUnits - routed) + "e-12");
    return v;
  }

  const auto side = flow.source_side(source);
  CutWitness w;
  std::int64_t blocked = 0, neighbour = 0;
  std::vector<bool> in_blocked(zs.size(), false);
  for (std::size_t b = 0; b < zs.size(); ++b)
    if (!side[ys.size() + b]) {
      in_blocked[b] = true;
      w.blocked.push_back(zs[b].first);
      blocked += zs[b].second;
    }
  std::vector<bool> is_neighbour(ys.size(), false);
  for (const auto& arc : arcs)
    if (in_blocked[arc.b]) is_neighbour[arc.a] = true;
  for (std::size_t a = 0; a < ys.size(); ++a)
    if (is_neighbour[a]) {
      w.neighbours.push_back(ys[a].first);
      neighbour += ys[a].second;
    }
  w.blocked_mass = static_cast<double>(blocked) / kFlowUnits;
  w.neighbour_mass = static_cast<double>(neighbour) / kFlowUnits;
  w.deficit = static_cast<double>(blocked - neighbour) / kFlowUnits;
  v.status = Status::fails;
  v.witness = std::move(w);
  return v;
}

/// One conditioning step U ⊂ V = U + {added} inside B.
struct ScpPairResult {
  std::vector<std::size_t> u;
  std::vector<std::size_t> v;
  Status status = Status::holds;
  std::optional<CoveringCoupling> coupling;
  std::optional<CutWitness> cut;
};

struct ScpReport {
  Status status = Status::holds;
  std::vector<std::size_t> free_coords;  // coordinates outside B, in the order used by coupling masks
  std::vector<ScpPairResult> pairs;
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> skipped;

  const ScpPairResult* first_failure() const {
    for (const auto& p : pairs)
      if (p.status == Status::fails) return &p;
    return nullptr;
  }
};

/// For all U ⊂ V ⊆ B with |V \ U| = 1: the law of X outside B given X ∩ B = U must
/// stochastically cover the law given X ∩ B = V. Pairs with an event of probability <= 1e-12
/// are skipped and listed.
inline ScpReport scp_check(const BernoulliLaw& law, const std::vector<std::size_t>& block) {
  check_coords(block, law.n());
  const Mask bmask = mask_of(block);
  const auto bcoords = coords_of(bmask);
  ScpReport report;
  for (std::size_t k = 0; k < law.n(); ++k)
    if (!has_bit(bmask, k)) report.free_coords.push_back(k);
  const Mask bfull = full_mask(bcoords.size());
  for (Mask uc = 0; uc <= bfull; ++uc)
    for (std::size_t t = 0; t < bcoords.size(); ++t) {
      if (has_bit(uc, t)) continue;
      const Mask u = deposit_bits(uc, bcoords), vset = u | (Mask{1} << bcoords[t]);
      ScpPairResult pr;
      pr.u = coords_of(u);
      pr.v = coords_of(vset);
      const double pu = law.prob_restricted(bmask, u), pv = law.prob_restricted(bmask, vset);
      if (pu <= 1e-12 || pv <= 1e-12) {
        report.skipped.push_back({pr.u, pr.v});
        continue;
      }
      if (report.free_coords.empty()) {
        // Both conditionals are the point mass on the empty set.
        pr.coupling = CoveringCoupling{0, {{0, 0, 1.0}}};
        report.pairs.push_back(std::move(pr));
        continue;
      }
      const auto ly = conditional_on_complement(law, bmask, u, 0.0);
      const auto lz = conditional_on_complement(law, bmask, vset, 0.0);
      CoveringCoupling c;
      auto verdict = covering_feasible(*ly, *lz, &c);
      pr.status = verdict.status;
      if (verdict.holds())
        pr.coupling = std::move(c);
      else
        pr.cut = verdict.witness;
      if (pr.status == Status::fails) report.status = Status::fails;
      report.pairs.push_back(std::move(pr));
    }
  return report;
}

}  // namespace negdep

#endif  // NEGDEP_SCP_COUPLING_HPP
