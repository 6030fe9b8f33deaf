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

#ifndef NEGDEP_GALLERY_HPP
#define NEGDEP_GALLERY_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "negdep/core.hpp"
#include "negdep/gaussian.hpp"

namespace negdep {

/// Y_i = Z_i - (1/i)(Z_1 + ... + Z_{i-1}), i = 1..n.
inline GaussianSpec log_growth_process(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "log-growth process needs n >= 2");
  Eigen::MatrixXd cov(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j) {
      const double di = static_cast<double>(i), dj = static_cast<double>(j);
      cov(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) =
          i == j ? 1.0 + (di - 1.0) / (di * di) : -1.0 / (di * dj);
    }
  return centered_spec(std::move(cov));
}

/// Hub Z_0 = -(1/sqrt n) sum Z_i first, then the n independent leaves.
inline GaussianSpec star_process(std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "star process needs n >= 1");
  const auto d = static_cast<Eigen::Index>(n + 1);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(d, d);
  const double c = -1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 1; i < d; ++i) cov(0, i) = cov(i, 0) = c;
  return centered_spec(std::move(cov));
}

/// Stationary Y_i = Z_i - c Z_{i-1}.
inline GaussianSpec ma1_process(std::size_t n, double c = 0.5) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "MA(1) process needs n >= 1");
  const auto d = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(d, d) * (1.0 + c * c);
  for (Eigen::Index i = 0; i + 1 < d; ++i) cov(i, i + 1) = cov(i + 1, i) = -c;
  return centered_spec(std::move(cov));
}

inline BernoulliLaw product_law(const std::vector<double>& p) {
  if (p.empty()) throw Error(ErrorCode::InconsistentDimension, "product law needs n >= 1");
  if (p.size() > 12) throw Error(ErrorCode::DimensionTooLarge, "product law needs n <= 12");
  for (double q : p)
    if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::OutOfRange, "probability outside [0,1]");
  const std::size_t n = p.size();
  std::vector<double> table(std::size_t{1} << n, 1.0);
  for (Mask m = 0; m < table.size(); ++m)
    for (std::size_t i = 0; i < n; ++i) table[m] *= has_bit(m, i) ? p[i] : 1.0 - p[i];
  return BernoulliLaw::from_dense(n, std::move(table), 1e-9);
}

struct Graph {
  std::size_t vertices = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// Uniform spanning tree as a law on edge indicators (coordinate k = edge k).
inline BernoulliLaw ust_law(const Graph& g) {
  const std::size_t m = g.edges.size();
  if (m < 1) throw Error(ErrorCode::Disconnected, "graph has no edges");
  if (m > 8) throw Error(ErrorCode::DimensionTooLarge, "spanning-tree enumeration is limited to 8 edges");
  for (const auto& [a, b] : g.edges)
    if (a >= g.vertices || b >= g.vertices) throw Error(ErrorCode::IndexOutOfRange, "edge endpoint out of range");
  std::vector<Mask> trees;
  for (Mask s = 0; s <= full_mask(m); ++s) {
    if (static_cast<std::size_t>(popcount(s)) + 1 != g.vertices) continue;
    std::vector<std::size_t> parent(g.vertices);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    bool acyclic = true;
    for (std::size_t k = 0; k < m && acyclic; ++k)
      if (has_bit(s, k)) {
        auto ra = find(g.edges[k].first), rb = find(g.edges[k].second);
        if (ra == rb) acyclic = false;
        parent[ra] = rb;
      }
    if (acyclic) trees.push_back(s);
  }
  if (trees.empty()) throw Error(ErrorCode::Disconnected, "graph has no spanning tree");
  std::vector<double> table(std::size_t{1} << m, 0.0);
  for (auto t : trees) table[t] = 1.0 / static_cast<double>(trees.size());
  return BernoulliLaw::from_dense(m, std::move(table), 1e-9);
}

inline ThresholdLaw thresholded(const GaussianSpec& spec, double precision, std::uint64_t seed) {
  return threshold_law(spec, precision, seed);
}

// ---------------------------------------------------------------------------
// Registry

enum class GalleryKind { gaussian_spec, bernoulli_law };

struct ExpectedProperty {
  std::string checker;   // check-na, sr-screen, check-sr, gaussian-na, row-sum-half, scp
  std::string expected;  // holds, fails, not-holds
};

struct GalleryPayload {
  std::variant<GaussianSpec, BernoulliLaw> value;
  double na_tolerance = 1e-10;  // sampling noise allowance for Monte Carlo laws
  std::string method = "exact";
};

struct GalleryEntry {
  std::string name;
  GalleryKind kind = GalleryKind::bernoulli_law;
  std::string description;
  std::optional<std::size_t> default_n;  // set for families indexed by n
  std::size_t min_n = 1;
  std::size_t max_n = 0;  // 0: unbounded
  std::vector<ExpectedProperty> expected;
  std::function<GalleryPayload(std::size_t n, std::uint64_t seed)> build;
  // Gaussian families: the underlying spec at size n, whether the entry is its sign pattern,
  // and whether size-n members are leading blocks of larger ones.
  std::function<GaussianSpec(std::size_t)> spec_family;
  bool thresholded_family = false;
  bool nested = true;
};

inline constexpr double kGalleryPrecision = 1e-3;
inline constexpr std::uint64_t kGallerySeed = 20260101;

namespace detail {

inline GalleryPayload threshold_payload(const GaussianSpec& spec, std::uint64_t seed) {
  auto tl = threshold_law(spec, kGalleryPrecision, seed);
  GalleryPayload out{tl.law, 1e-10, to_string(tl.method)};
  if (tl.method == OrthantMethod::monte_carlo) out.na_tolerance = tl.noise_tolerance();
  return out;
}

inline GalleryEntry fixed_law(std::string name, std::string description, std::vector<ExpectedProperty> expected,
                              std::function<BernoulliLaw()> make) {
  return {std::move(name), GalleryKind::bernoulli_law, std::move(description), std::nullopt, 1, 0,
          std::move(expected), [make](std::size_t, std::uint64_t) { return GalleryPayload{make()}; }};
}

inline std::vector<ExpectedProperty> sr_fixture_properties() {
  return {{"check-na", "holds"}, {"sr-screen", "holds"}, {"check-sr", "holds"}, {"row-sum-half", "holds"}, {"scp", "holds"}};
}

}  // namespace detail

inline const std::vector<GalleryEntry>& gallery() {
  static const std::vector<GalleryEntry> entries = [] {
    std::vector<GalleryEntry> e;
    using detail::fixed_law;
    e.push_back(fixed_law("product-2", "independent fair bits", detail::sr_fixture_properties(),
                          [] { return product_law({0.5, 0.5}); }));
    e.push_back(fixed_law("product-3", "independent bits with means 0.3, 0.5, 0.7", detail::sr_fixture_properties(),
                          [] { return product_law({0.3, 0.5, 0.7}); }));
    e.push_back(fixed_law("ust-triangle", "uniform spanning tree of the triangle", detail::sr_fixture_properties(),
                          [] { return ust_law({3, {{0, 1}, {1, 2}, {0, 2}}}); }));
    e.push_back(fixed_law("ust-path3", "uniform spanning tree of the 3-vertex path", detail::sr_fixture_properties(),
                          [] { return ust_law({3, {{0, 1}, {1, 2}}}); }));
    e.push_back(fixed_law("ust-square", "uniform spanning tree of the 4-cycle", detail::sr_fixture_properties(),
                          [] { return ust_law({4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}}); }));
    e.push_back(fixed_law("ust-diamond", "uniform spanning tree of the 4-cycle with one chord",
                          detail::sr_fixture_properties(),
                          [] { return ust_law({4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}}}); }));
    e.push_back(fixed_law("ust-k4", "uniform spanning tree of K4", detail::sr_fixture_properties(),
                          [] { return ust_law({4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}}); }));
    e.push_back(fixed_law("anticorrelated-pair", "exactly one of two bits, each with probability 1/2",
                          detail::sr_fixture_properties(), [] { return law_from_pmf({{"10", 0.5}, {"01", 0.5}}); }));
    e.push_back(fixed_law("perfect-correlation", "two equal fair bits",
                          {{"check-na", "fails"}, {"sr-screen", "holds"}, {"check-sr", "fails"}},
                          [] { return law_from_pmf({{"00", 0.5}, {"11", 0.5}}); }));

    e.push_back({"star", GalleryKind::gaussian_spec, "hub -(1/sqrt n) sum of n leaves, hub is coordinate 0", 3, 1, 0,
                 {{"gaussian-na", "holds"}},
                 [](std::size_t n, std::uint64_t) { return GalleryPayload{star_process(n)}; },
                 [](std::size_t n) { return star_process(n); }, false, false});
    e.push_back({"star-threshold", GalleryKind::bernoulli_law, "sign pattern of the star process, hub first", 3, 1, 11,
                 {{"check-na", "holds"}, {"sr-screen", "fails"}, {"check-sr", "not-holds"}},
                 [](std::size_t n, std::uint64_t seed) { return detail::threshold_payload(star_process(n), seed); },
                 [](std::size_t n) { return star_process(n); }, true, false});
    e.push_back({"log-growth", GalleryKind::gaussian_spec, "Y_i = Z_i - (1/i)(Z_1 + ... + Z_{i-1})", 50, 2, 0,
                 {{"gaussian-na", "holds"}},
                 [](std::size_t n, std::uint64_t) { return GalleryPayload{log_growth_process(n)}; },
                 [](std::size_t n) { return log_growth_process(n); }, false, true});
    e.push_back({"log-growth-threshold", GalleryKind::bernoulli_law, "sign pattern of the log-growth process", 4, 2, 12,
                 {{"check-na", "holds"}},
                 [](std::size_t n, std::uint64_t seed) { return detail::threshold_payload(log_growth_process(n), seed); },
                 [](std::size_t n) { return log_growth_process(n); }, true, true});
    e.push_back({"ma1", GalleryKind::gaussian_spec, "stationary Y_i = Z_i - Z_{i-1}/2", 8, 1, 0,
                 {{"gaussian-na", "holds"}},
                 [](std::size_t n, std::uint64_t) { return GalleryPayload{ma1_process(n)}; },
                 [](std::size_t n) { return ma1_process(n); }, false, true});
    e.push_back({"ma1-threshold", GalleryKind::bernoulli_law, "sign pattern of the stationary MA(1) process", 4, 1, 12,
                 {{"check-na", "holds"}},
                 [](std::size_t n, std::uint64_t seed) { return detail::threshold_payload(ma1_process(n), seed); },
                 [](std::size_t n) { return ma1_process(n); }, true, true});
    return e;
  }();
  return entries;
}

struct ResolvedGallery {
  const GalleryEntry* entry = nullptr;
  std::optional<std::size_t> n;
};

/// Accepts exact names and `<family>-<n>` for families indexed by n.
inline ResolvedGallery find_gallery(const std::string& name) {
  for (const auto& e : gallery())
    if (e.name == name) return {&e, e.default_n};
  const auto dash = name.rfind('-');
  if (dash != std::string::npos && dash + 1 < name.size() &&
      name.find_first_not_of("0123456789", dash + 1) == std::string::npos) {
    const std::string base = name.substr(0, dash);
    for (const auto& e : gallery())
      if (e.name == base && e.default_n) return {&e, std::stoul(name.substr(dash + 1))};
  }
  throw Error(ErrorCode::UnknownGalleryEntry, "no gallery entry named '" + name + "'");
}

inline GalleryPayload build_gallery(const std::string& name, std::optional<std::size_t> n_override = std::nullopt,
                                    std::uint64_t seed = kGallerySeed) {
  const auto r = find_gallery(name);
  std::size_t n = 0;
  if (r.entry->default_n) {
    n = n_override.value_or(*r.n);
    if (n < r.entry->min_n || (r.entry->max_n && n > r.entry->max_n))
      throw Error(ErrorCode::OutOfRange, "n = " + std::to_string(n) + " outside the range of '" + r.entry->name + "'");
  } else if (n_override) {
    throw Error(ErrorCode::InvalidArgument, "'" + r.entry->name + "' takes no size parameter");
  }
  return r.entry->build(n, seed);
}

}  // namespace negdep

#endif  // NEGDEP_GALLERY_HPP
