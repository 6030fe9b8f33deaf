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

#ifndef NEGDEP_NA_VERIFY_HPP
#define NEGDEP_NA_VERIFY_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "negdep/core.hpp"
#include "negdep/max_flow.hpp"

// Exact negative-association certification for finite Bernoulli laws.
//
// Layer-cake reduction: a bounded increasing f on {0,1}^A equals c + sum_t w_t 1_{F_t} with
// w_t >= 0 and F_t = {f >= t} up-sets, so by bilinearity cov(f, g) <= 0 for all increasing
// f, g iff cov(1_F, 1_G) <= 0 for all up-sets F, G. Enlarging A or B only enlarges the
// function classes, so complementary splits A ⊔ B = [n] suffice. For each split we enumerate
// up-sets on the smaller block and find the best up-set on the other block exactly as a
// maximum-weight closure (a min-cut).

namespace negdep {

/// Up-set of the cube {0,1}^k (k <= 4), stored as a bitmask over the 2^k points.
struct UpSet {
  std::size_t k = 0;
  std::uint16_t points = 0;

  bool contains(Mask x) const { return (points >> x) & 1u; }
  friend bool operator==(const UpSet&, const UpSet&) = default;
};

/// All up-sets of {0,1}^k in increasing order of their point masks, including ∅ and the cube.
inline std::vector<UpSet> enumerate_upsets(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "up-set enumeration needs k >= 1");
  if (k > 4) throw Error(ErrorCode::DimensionTooLarge, "up-set enumeration is limited to k <= 4");
  // An up-set on k coordinates is a pair (lower slice U0, upper slice U1) of up-sets on
  // k-1 coordinates with U0 ⊆ U1.
  std::vector<std::uint16_t> level{0b0, 0b1};
  for (std::size_t d = 1; d <= k; ++d) {
    const unsigned shift = 1u << (d - 1);
    std::vector<std::uint16_t> next;
    for (auto upper : level)
      for (auto lower : level)
        if ((lower & upper) == lower) next.push_back(static_cast<std::uint16_t>(lower | (upper << shift)));
    level = std::move(next);
  }
  std::sort(level.begin(), level.end());
  std::vector<UpSet> out;
  out.reserve(level.size());
  for (auto pts : level) out.push_back({k, pts});
  return out;
}

struct PairWitness {
  std::size_t i = 0;
  std::size_t j = 0;
  double covariance = 0.0;
};

/// A violating pair of increasing indicator functions. Up-set members are compact patterns
/// over the listed block coordinates (bit t = block[t]).
struct NAWitness {
  std::vector<std::size_t> setA;
  std::vector<std::size_t> setB;
  std::vector<Mask> upsetF;
  std::vector<Mask> upsetG;
  double covariance = 0.0;
};

/// Recomputes cov(1_F(X_A), 1_G(X_B)) directly from the law.
inline double witness_covariance(const BernoulliLaw& law, const NAWitness& w) {
  auto in = [](const std::vector<Mask>& family, Mask x) {
    return std::find(family.begin(), family.end(), x) != family.end();
  };
  double pf = 0.0, pg = 0.0, pfg = 0.0;
  law.for_each([&](Mask m, double p) {
    bool f = in(w.upsetF, extract_bits(m, w.setA));
    bool g = in(w.upsetG, extract_bits(m, w.setB));
    if (f) pf += p;
    if (g) pg += p;
    if (f && g) pfg += p;
  });
  return pfg - pf * pg;
}

inline Verdict<PairWitness> check_negative_correlation(const BernoulliLaw& law, double tolerance = 1e-12) {
  const Eigen::MatrixXd cov = covariance_matrix(law);
  Verdict<PairWitness> v;
  v.status = Status::holds;
  std::uint64_t pairs = 0;
  for (Eigen::Index i = 0; i < cov.rows() && !v.witness; ++i)
    for (Eigen::Index j = i + 1; j < cov.cols(); ++j) {
      ++pairs;
      if (cov(i, j) > tolerance) {
        v.status = Status::fails;
        v.witness = PairWitness{static_cast<std::size_t>(i), static_cast<std::size_t>(j), cov(i, j)};
        break;
      }
    }
  v.budget_spent["pairs_checked"] = pairs;
  return v;
}

namespace detail {

// Coordinates of `block` on which the family of compact points actually depends.
inline std::vector<std::size_t> essential_positions(const std::vector<bool>& member, std::size_t width) {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < width; ++t) {
    const Mask bit = Mask{1} << t;
    for (Mask x = 0; x < member.size(); ++x)
      if (!(x & bit) && member[x] != member[x | bit]) {
        out.push_back(t);
        break;
      }
  }
  return out;
}

// Restricts a family that depends only on `positions` to those positions.
inline std::vector<Mask> project_family(const std::vector<bool>& member, const std::vector<std::size_t>& positions) {
  std::vector<Mask> out;
  for (Mask x = 0; x < member.size(); ++x)
    if (member[x] && deposit_bits(extract_bits(x, positions), positions) == x) out.push_back(extract_bits(x, positions));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct ClosureResult {
  double value = 0.0;
  std::vector<bool> members;
};

// Maximum of sum_{c in G} weight[c] over up-sets G of {0,1}^width.
inline ClosureResult max_weight_upset(const std::vector<double>& weight, std::size_t width) {
  const std::size_t points = weight.size();
  ClosureResult best;
  best.members.assign(points, false);
  if (std::none_of(weight.begin(), weight.end(), [](double w) { return w > 0.0; })) return best;
  const std::size_t source = points, sink = points + 1;
  MaxFlow<double> flow(points + 2);
  for (std::size_t c = 0; c < points; ++c) {
    if (weight[c] > 0.0) {
      flow.add_edge(source, c, weight[c]);
    } else if (weight[c] < 0.0) {
      flow.add_edge(c, sink, -weight[c]);
    }
    for (std::size_t t = 0; t < width; ++t)
      if (!has_bit(static_cast<Mask>(c), t)) flow.add_edge(c, c | (std::size_t{1} << t), MaxFlow<double>::infinite());
  }
  flow.solve(source, sink);
  auto side = flow.source_side(source);
  double value = 0.0;
  for (std::size_t c = 0; c < points; ++c) {
    best.members[c] = side[c];
    if (side[c]) value += weight[c];
  }
  best.value = value;
  return best;
}

}  // namespace detail

inline constexpr std::size_t kMaxNADimension = 8;

/// Decides negative association exactly for laws with at most 8 non-constant coordinates.
inline Verdict<NAWitness> check_na_exact(const BernoulliLaw& law, double tolerance = 1e-10) {
  Verdict<NAWitness> v;
  v.status = Status::holds;

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < law.n(); ++i) {
    double m = law.mean(i);
    if (m > 1e-15 && m < 1.0 - 1e-15) active.push_back(i);
  }
  if (active.size() > kMaxNADimension)
    throw Error(ErrorCode::DimensionTooLarge,
                "exact NA check supports at most 8 non-constant coordinates, got " + std::to_string(active.size()));
  if (active.size() < law.n())
    v.notes.push_back("pruned " + std::to_string(law.n() - active.size()) + " almost-surely constant coordinate(s)");

  const std::size_t m = active.size();
  std::uint64_t splits = 0, pairs = 0, closures = 0;
  double max_positive = 0.0;
  if (m < 2) {
    v.budget_spent = {{"splits", 0}, {"pairs_checked", 0}, {"closure_solves", 0}};
    return v;
  }

  std::vector<double> table(std::size_t{1} << m, 0.0);
  law.for_each([&](Mask x, double p) { table[extract_bits(x, active)] += p; });

  const Mask all = full_mask(m);
  for (Mask a = 1; a < all && !v.witness; ++a) {
    const Mask b = all ^ a;
    if (a > b) continue;
    ++splits;
    const bool a_small = popcount(a) <= popcount(b);
    const auto small = coords_of(a_small ? a : b);
    const auto large = coords_of(a_small ? b : a);
    const std::size_t ns = std::size_t{1} << small.size();
    const std::size_t nl = std::size_t{1} << large.size();

    std::vector<double> joint(ns * nl, 0.0), p_small(ns, 0.0), p_large(nl, 0.0);
    for (Mask x = 0; x <= all; ++x) {
      const double p = table[x];
      if (p == 0.0) continue;
      const Mask s = extract_bits(x, small), l = extract_bits(x, large);
      joint[s * nl + l] += p;
      p_small[s] += p;
      p_large[l] += p;
    }

    for (const auto& f : enumerate_upsets(small.size())) {
      if (f.points == 0 || f.points == static_cast<std::uint16_t>((1u << ns) - 1)) continue;
      ++pairs;
      double pf = 0.0;
      std::vector<double> weight(nl, 0.0);
      for (Mask s = 0; s < ns; ++s) {
        if (!f.contains(s)) continue;
        pf += p_small[s];
        for (std::size_t l = 0; l < nl; ++l) weight[l] += joint[s * nl + l];
      }
      for (std::size_t l = 0; l < nl; ++l) weight[l] -= pf * p_large[l];
      ++closures;
      auto best = detail::max_weight_upset(weight, large.size());
      if (best.value <= 0.0) continue;
      max_positive = std::max(max_positive, best.value);
      if (best.value <= tolerance) continue;

      std::vector<bool> f_members(ns);
      for (Mask s = 0; s < ns; ++s) f_members[s] = f.contains(s);
      const auto f_pos = detail::essential_positions(f_members, small.size());
      const auto g_pos = detail::essential_positions(best.members, large.size());
      NAWitness w;
      for (auto t : f_pos) w.setA.push_back(active[small[t]]);
      for (auto t : g_pos) w.setB.push_back(active[large[t]]);
      w.upsetF = detail::project_family(f_members, f_pos);
      w.upsetG = detail::project_family(best.members, g_pos);
      w.covariance = witness_covariance(law, w);
      v.status = Status::fails;
      v.witness = std::move(w);
      break;
    }
  }
  if (v.holds() && max_positive > 0.0)
    v.notes.push_back("holds with margin: largest positive indicator covariance " + std::to_string(max_positive) +
                      " is within tolerance");
  v.budget_spent = {{"splits", splits}, {"pairs_checked", pairs}, {"closure_solves", closures}};
  return v;
}

}  // namespace negdep

#endif  // NEGDEP_NA_VERIFY_HPP
