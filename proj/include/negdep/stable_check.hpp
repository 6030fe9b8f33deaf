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

#ifndef NEGDEP_STABLE_CHECK_HPP
#define NEGDEP_STABLE_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "negdep/core.hpp"
#include "negdep/gaussian.hpp"

// Strong Rayleigh certification.
//
// Refutation is sound: a reported `fails` carries a point of the open upper half-space where
// the generating polynomial vanishes (after polishing). Acceptance relies on the multiaffine
// criterion: f is real stable iff Δ_ij(x) = ∂_i f ∂_j f - f ∂_i∂_j f >= 0 for all real x
// and all i, j. Δ_ij does not depend on x_i, x_j and is quadratic in every other
// coordinate, so the search is exact coordinate descent from many starts. A `holds` from
// the numeric path is certified only up to the search budget.

namespace negdep {

using Complex = std::complex<double>;

/// Point of ℍ^n where the polynomial (numerically) vanishes.
struct RootWitness {
  std::vector<Complex> point;
  Complex value;
  bool imag_parts_positive = false;
};

/// Violated covariance inequality of a strongly Rayleigh law at one index.
struct InequalityWitness {
  std::size_t index = 0;
  std::vector<std::string> violated;  // row_sum_nonnegative, abs_sum_le_two_var, abs_sum_le_half
  double row_sum = 0.0;
  double abs_sum = 0.0;
  double variance = 0.0;
};

struct StableBudget {
  std::size_t starts_per_pair = 64;
  std::size_t max_sweeps = 100;
};

namespace detail {

inline constexpr std::uint64_t kDeltaTag = 0x44454c54;

/// Re-evaluates the witness and checks the soundness contract.
inline bool root_witness_valid(const MultiaffinePoly& poly, const RootWitness& w) {
  if (w.point.size() != poly.n()) return false;
  for (auto z : w.point)
    if (!(z.imag() >= 1e-12)) return false;
  const Complex value = poly.evaluate(std::span<const Complex>(w.point));
  return std::abs(value) <= 1e-8 * poly.sum_abs_coeffs();
}

// Newton iterations in coordinate `k` with the others fixed; f is affine in z_k, so this
// converges in one or two steps.
inline void polish_root(const MultiaffinePoly& poly, std::vector<Complex>& z, std::size_t k) {
  const MultiaffinePoly dk = poly.derivative(k);
  for (int it = 0; it < 50; ++it) {
    const Complex f = poly.evaluate(std::span<const Complex>(z));
    const Complex df = dk.evaluate(std::span<const Complex>(z));
    if (std::abs(df) == 0.0) break;
    const Complex step = f / df;
    z[k] -= step;
    if (std::abs(step) < 1e-10) break;
  }
}

// Builds a half-space root from real bivariate coefficients (a, b, c, d) in (z_i, z_j) with
// bc - ad < 0. The Möbius map z_i -> -(a + b z_i)/(c + d z_i) has determinant bc - ad and
// therefore sends ℍ into ℍ.
inline std::optional<RootWitness> root_from_negative_delta(const MultiaffinePoly& poly, std::size_t i, std::size_t j,
                                                           const std::vector<double>& x) {
  const std::vector<std::size_t> keep{i, j};
  const auto coef = poly.restrict_to<double>(keep, x);
  const double c = coef[2], d = coef[3];
  const double s = (c != 0.0 && d != 0.0) ? std::abs(c / d) : 1.0;
  for (double eps = 1e-3; eps >= 1e-11; eps *= 0.1) {
    std::vector<Complex> z(poly.n());
    for (std::size_t k = 0; k < poly.n(); ++k) z[k] = Complex(x[k], eps * (1.0 + std::abs(x[k])));
    z[i] = Complex(0.0, s);
    const auto cc = poly.restrict_to<Complex>(keep, z);
    const Complex denom = cc[2] + cc[3] * z[i];
    if (std::abs(denom) == 0.0) continue;
    z[j] = -(cc[0] + cc[1] * z[i]) / denom;
    polish_root(poly, z, j);
    RootWitness w{z, poly.evaluate(std::span<const Complex>(z)), true};
    for (auto zk : z) w.imag_parts_positive = w.imag_parts_positive && zk.imag() >= 1e-12;
    if (root_witness_valid(poly, w)) return w;
  }
  return std::nullopt;
}

struct DeltaSearch {
  bool refuted = false;
  std::vector<double> point;
  double delta = 0.0;
  std::uint64_t starts = 0, sweeps = 0, exhausted_starts = 0;
};

inline double delta_threshold(double b, double c, double a, double d) {
  return -1e-12 * std::max(1.0, std::abs(b * c) + std::abs(a * d));
}

// Minimizes Δ_ij over real points by exact coordinate descent from multiple starts.
inline DeltaSearch minimize_delta(const MultiaffinePoly& poly, std::size_t i, std::size_t j, const StableBudget& budget,
                                  std::mt19937_64& engine) {
  const std::size_t n = poly.n();
  std::vector<std::size_t> others;
  for (std::size_t k = 0; k < n; ++k)
    if (k != i && k != j) others.push_back(k);
  const std::vector<std::size_t> pair{i, j};
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  DeltaSearch out;

  // Coefficients are nonnegative, so the restriction at |x| bounds the magnitude of every
  // term that cancels in e; the threshold scales with it.
  std::vector<double> ax(n);
  auto delta_at = [&](const std::vector<double>& x, double& thr) {
    const auto e = poly.restrict_to<double>(pair, x);
    for (std::size_t k = 0; k < n; ++k) ax[k] = std::abs(x[k]);
    const auto m = poly.restrict_to<double>(pair, ax);
    thr = delta_threshold(m[1], m[2], m[0], m[3]);
    return e[1] * e[2] - e[0] * e[3];
  };

  for (std::size_t start = 0; start < budget.starts_per_pair; ++start) {
    ++out.starts;
    std::vector<double> x(n, 0.0);
    if (start == 1) std::fill(x.begin(), x.end(), 1.0);
    if (start == 2) std::fill(x.begin(), x.end(), -1.0);
    if (start > 2)
      for (auto k : others) x[k] = std::tan(std::numbers::pi * (uniform(engine) - 0.5));
    double thr = 0.0;
    double current = delta_at(x, thr);
    if (current < thr) {
      out = {true, x, current, out.starts, out.sweeps, out.exhausted_starts};
      return out;
    }
    if (others.empty()) continue;
    bool converged = false;
    for (std::size_t sweep = 0; sweep < budget.max_sweeps; ++sweep) {
      ++out.sweeps;
      const double before = current;
      for (auto k : others) {
        // Δ as a quadratic in x_k from the trivariate restriction to (i, j, k).
        const std::vector<std::size_t> three{i, j, k};
        const auto e = poly.restrict_to<double>(three, x);
        const double a0 = e[0], a1 = e[4], b0 = e[1], b1 = e[5], c0 = e[2], c1 = e[6], d0 = e[3], d1 = e[7];
        const double alpha = b1 * c1 - a1 * d1;
        const double beta = b0 * c1 + b1 * c0 - a0 * d1 - a1 * d0;
        const double gamma = b0 * c0 - a0 * d0;
        const double scale = std::abs(b1 * c1) + std::abs(a1 * d1) + 1e-300;
        double t = x[k];
        if (alpha < -1e-12 * scale) {
          // Unbounded below along x_k.
          const double big = 2.0 * (std::abs(beta) + std::sqrt(std::abs(alpha * gamma))) / -alpha + 1.0;
          const double lo = alpha * big * big - beta * big + gamma;
          const double hi = alpha * big * big + beta * big + gamma;
          t = lo < hi ? -big : big;
        } else if (alpha <= 1e-12 * scale) {
          const double lin_scale = std::abs(b0 * c1) + std::abs(b1 * c0) + std::abs(a0 * d1) + std::abs(a1 * d0);
          if (std::abs(beta) > 1e-12 * (lin_scale + 1e-300)) t = -std::copysign(std::abs(gamma) / std::abs(beta) + 1.0, beta);
        } else {
          t = -beta / (2.0 * alpha);
        }
        if (std::isfinite(t)) x[k] = t;
        current = delta_at(x, thr);
        if (current < thr) {
          out.refuted = true;
          out.point = x;
          out.delta = current;
          return out;
        }
      }
      if (std::abs(before - current) <= 1e-12 * std::max(1.0, std::abs(current))) {
        converged = true;
        break;
      }
    }
    if (!converged) ++out.exhausted_starts;
  }
  return out;
}

}  // namespace detail

/// Two-variable multiaffine stability: c_1 c_2 >= c_∅ c_12.
inline Verdict<RootWitness> check_stable_bivariate(const MultiaffinePoly& poly, double tolerance = 1e-12) {
  if (poly.n() != 2) throw Error(ErrorCode::WrongDimension, "bivariate check needs n = 2");
  for (double c : poly.coeffs())
    if (c < 0.0) throw Error(ErrorCode::NegativeCoefficient, "negative coefficient " + std::to_string(c));
  const double c0 = poly.coeff(0b00), c1 = poly.coeff(0b01), c2 = poly.coeff(0b10), c12 = poly.coeff(0b11);
  Verdict<RootWitness> v;
  v.budget_spent["evaluations"] = 1;
  if (c1 * c2 >= c0 * c12 - tolerance) {
    v.status = Status::holds;
    return v;
  }
  // c0 * c12 > c1 * c2 >= 0, so c12 > 0 and the Möbius root below exists.
  const double s = c2 > 0.0 ? c2 / c12 : 1.0;
  std::vector<Complex> z{Complex(0.0, s), Complex(0.0, 0.0)};
  z[1] = -(Complex(c0) + c1 * z[0]) / (Complex(c2) + c12 * z[0]);
  detail::polish_root(poly, z, 1);
  RootWitness w{z, poly.evaluate(std::span<const Complex>(z)), z[0].imag() > 0.0 && z[1].imag() > 0.0};
  if (detail::root_witness_valid(poly, w)) {
    v.status = Status::fails;
    v.witness = std::move(w);
  } else {
    v.status = Status::inconclusive;
    v.notes.push_back("inequality violated by less than the witness resolution");
  }
  return v;
}

/// Necessary covariance conditions of strongly Rayleigh laws, per index i:
/// sum_j cov(X_i,X_j) >= 0 and sum_j |cov(X_i,X_j)| <= 2 var(X_i) <= 1/2.
inline Verdict<InequalityWitness> sr_necessary_conditions(const BernoulliLaw& law, double tolerance = 1e-12) {
  const Eigen::MatrixXd cov = covariance_matrix(law);
  Verdict<InequalityWitness> v;
  v.status = Status::holds;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    InequalityWitness w;
    w.index = static_cast<std::size_t>(i);
    w.row_sum = cov.row(i).sum();
    w.abs_sum = cov.row(i).cwiseAbs().sum();
    w.variance = cov(i, i);
    if (w.row_sum < -tolerance) w.violated.push_back("row_sum_nonnegative");
    if (w.abs_sum > 2.0 * w.variance + tolerance) w.violated.push_back("abs_sum_le_two_var");
    if (w.abs_sum > 0.5 + tolerance) w.violated.push_back("abs_sum_le_half");
    if (!w.violated.empty()) {
      v.status = Status::fails;
      v.witness = std::move(w);
      break;
    }
  }
  v.budget_spent["rows_checked"] = static_cast<std::uint64_t>(cov.rows());
  return v;
}

inline constexpr std::size_t kMaxStableDimension = 10;

/// Budgeted stability search for a multiaffine polynomial with nonnegative coefficients.
inline Verdict<RootWitness> check_stable_numeric(const MultiaffinePoly& poly, const StableBudget& budget,
                                                 std::uint64_t seed) {
  const std::size_t n = poly.n();
  if (n < 1) throw Error(ErrorCode::WrongDimension, "numeric stability check needs n >= 1");
  if (n > kMaxStableDimension) throw Error(ErrorCode::DimensionTooLarge, "numeric stability check needs n <= 10");
  double total = 0.0;
  for (double c : poly.coeffs()) {
    if (c < 0.0) throw Error(ErrorCode::NegativeCoefficient, "negative coefficient " + std::to_string(c));
    total += c;
  }
  if (total <= 0.0) throw Error(ErrorCode::InvalidArgument, "zero polynomial");

  Verdict<RootWitness> v;
  std::vector<double> normalized(poly.coeffs().begin(), poly.coeffs().end());
  for (double& c : normalized) c /= total;
  const auto screen = sr_necessary_conditions(BernoulliLaw::from_dense(n, normalized));

  std::uint64_t starts = 0, sweeps = 0, exhausted_pairs = 0, pair_index = 0;
  bool negative_without_witness = false;
  for (std::size_t i = 0; i < n && !v.witness; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++pair_index) {
      auto engine = detail::stream_engine(seed, pair_index, detail::kDeltaTag);
      const auto search = detail::minimize_delta(poly, i, j, budget, engine);
      starts += search.starts;
      sweeps += search.sweeps;
      if (search.starts > 0 && search.exhausted_starts == search.starts) ++exhausted_pairs;
      if (!search.refuted) continue;
      if (auto w = detail::root_from_negative_delta(poly, i, j, search.point)) {
        v.status = Status::fails;
        v.witness = std::move(*w);
        v.notes.push_back("Δ_" + std::to_string(i) + std::to_string(j) + " = " + std::to_string(search.delta) +
                          " < 0 at a real point; root witness polished");
        break;
      }
      negative_without_witness = true;
    }
  v.budget_spent = {{"pairs", pair_index}, {"starts", starts}, {"sweeps", sweeps}, {"exhausted_pairs", exhausted_pairs}};
  if (v.witness) return v;

  if (negative_without_witness) {
    v.status = Status::inconclusive;
    v.notes.push_back("negative Δ found but no half-space root could be polished");
  } else if (screen.fails()) {
    v.status = Status::inconclusive;
    v.notes.push_back("covariance screen failed at index " + std::to_string(screen.witness->index) +
                      " but no root was located within budget");
  } else if (exhausted_pairs > 0) {
    v.status = Status::inconclusive;
    v.notes.push_back("BudgetExhausted: descent did not converge for " + std::to_string(exhausted_pairs) + " pair(s)");
  } else {
    v.status = Status::holds;
    v.notes.push_back("certified-by-budget: no negative Δ found and covariance screen passed");
  }
  return v;
}

using SRWitness = std::variant<InequalityWitness, RootWitness>;

struct SRStage {
  std::string name;
  Status status = Status::inconclusive;
  std::vector<std::string> notes;
  bool skipped = false;
};

struct SRVerdict : Verdict<SRWitness> {
  std::vector<SRStage> stages;
};

/// Covariance screen, then the exact two-variable test or the numeric search.
inline SRVerdict check_strongly_rayleigh(const BernoulliLaw& law, const StableBudget& budget, std::uint64_t seed) {
  if (law.n() > kMaxStableDimension) throw Error(ErrorCode::DimensionTooLarge, "strong Rayleigh check needs n <= 10");
  SRVerdict out;
  const auto screen = sr_necessary_conditions(law);
  out.stages.push_back({"necessary_conditions", screen.status, screen.notes, false});
  for (const auto& [k, c] : screen.budget_spent) out.budget_spent[k] += c;
  const std::string stability_stage = law.n() <= 2 ? "exact_bivariate" : "numeric_search";
  if (screen.fails()) {
    out.status = Status::fails;
    out.witness = *screen.witness;
    out.stages.push_back({stability_stage, Status::inconclusive, {}, true});
    return out;
  }
  const auto poly = generating_polynomial(law);
  Verdict<RootWitness> stable;
  if (law.n() == 1) {
    stable.status = Status::holds;
    stable.notes.push_back("univariate polynomials with nonnegative coefficients have only real roots");
  } else if (law.n() == 2) {
    stable = check_stable_bivariate(poly);
  } else {
    stable = check_stable_numeric(poly, budget, seed);
  }
  out.stages.push_back({stability_stage, stable.status, stable.notes, false});
  for (const auto& [k, c] : stable.budget_spent) out.budget_spent[k] += c;
  out.status = stable.status;
  if (stable.witness) out.witness = *stable.witness;
  out.notes = stable.notes;
  return out;
}

}  // namespace negdep

#endif  // NEGDEP_STABLE_CHECK_HPP
