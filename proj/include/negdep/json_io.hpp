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

#ifndef NEGDEP_JSON_IO_HPP
#define NEGDEP_JSON_IO_HPP

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "negdep/core.hpp"
#include "negdep/cov_diagnostics.hpp"
#include "negdep/gaussian.hpp"
#include "negdep/na_verify.hpp"
#include "negdep/scp_coupling.hpp"
#include "negdep/stable_check.hpp"

// Coordinates in serialized reports are 1-based; pattern strings index coordinates by
// character position.

namespace negdep::json_io {

using nlohmann::json;

inline json law_to_json(const BernoulliLaw& law) {
  json pmf = json::object();
  law.for_each([&](Mask m, double p) { pmf[mask_to_pattern(m, law.n())] = p; });
  return {{"n", law.n()}, {"pmf", pmf}};
}

inline BernoulliLaw law_from_json(const json& j) {
  if (!j.is_object() || !j.contains("pmf") || !j["pmf"].is_object())
    throw Error(ErrorCode::InvalidArgument, "law JSON needs an object field \"pmf\"");
  std::vector<std::pair<std::string, double>> entries;
  for (const auto& [key, value] : j["pmf"].items()) {
    if (!value.is_number()) throw Error(ErrorCode::InvalidArgument, "pmf value for '" + key + "' is not a number");
    entries.emplace_back(key, value.get<double>());
  }
  std::optional<std::size_t> n;
  if (j.contains("n")) {
    if (!j["n"].is_number_unsigned()) throw Error(ErrorCode::InvalidArgument, "\"n\" must be a nonnegative integer");
    n = j["n"].get<std::size_t>();
  }
  return law_from_pmf(entries, n);
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::InvalidArgument, what + " must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows)
      throw Error(ErrorCode::InconsistentDimension, what + " must be square");
    for (Eigen::Index k = 0; k < rows; ++k) {
      if (!row[static_cast<std::size_t>(k)].is_number())
        throw Error(ErrorCode::InvalidArgument, what + " entries must be numbers");
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  return m;
}

inline Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, what + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::InvalidArgument, what + " entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline json spec_to_json(const GaussianSpec& spec) {
  return {{"mean", vector_to_json(spec.mean)}, {"cov", matrix_to_json(spec.cov)}, {"thresholds", vector_to_json(spec.thresholds)}};
}

inline GaussianSpec spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("cov")) throw Error(ErrorCode::InvalidArgument, "spec JSON needs a \"cov\" matrix");
  GaussianSpec spec;
  spec.cov = matrix_from_json(j["cov"], "cov");
  const auto n = spec.cov.rows();
  spec.mean = j.contains("mean") ? vector_from_json(j["mean"], "mean") : Eigen::VectorXd::Zero(n);
  spec.thresholds = j.contains("thresholds") ? vector_from_json(j["thresholds"], "thresholds") : Eigen::VectorXd::Zero(n);
  if (spec.mean.size() != n || spec.thresholds.size() != n)
    throw Error(ErrorCode::InconsistentDimension, "mean, cov and thresholds disagree on dimension");
  return spec;
}

/// A Gram matrix given bare or as {"gram": [[...]]}.
inline Eigen::MatrixXd gram_from_json(const json& j) {
  if (j.is_object() && j.contains("gram")) return matrix_from_json(j["gram"], "gram");
  return matrix_from_json(j, "gram");
}

inline json coords_to_json(const std::vector<std::size_t>& coords) {
  json out = json::array();
  for (auto c : coords) out.push_back(c + 1);
  return out;
}

inline json patterns_to_json(const std::vector<Mask>& family, std::size_t width) {
  json out = json::array();
  for (auto m : family) out.push_back(mask_to_pattern(m, width));
  return out;
}

inline json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const PairWitness& w) {
  return {{"i", w.i + 1}, {"j", w.j + 1}, {"covariance", w.covariance}};
}

inline json to_json(const NAWitness& w) {
  return {{"setA", coords_to_json(w.setA)},
          {"setB", coords_to_json(w.setB)},
          {"upsetF", patterns_to_json(w.upsetF, w.setA.size())},
          {"upsetG", patterns_to_json(w.upsetG, w.setB.size())},
          {"covariance", w.covariance}};
}

inline json to_json(const RootWitness& w) {
  json pt = json::array();
  for (const auto& z : w.point) pt.push_back(complex_to_json(z));
  return {{"kind", "root"}, {"point", pt}, {"value", complex_to_json(w.value)}, {"imag_parts_positive", w.imag_parts_positive}};
}

inline json to_json(const InequalityWitness& w) {
  return {{"kind", "inequality"},  {"index", w.index + 1},     {"violated", w.violated},
          {"row_sum", w.row_sum}, {"abs_sum", w.abs_sum}, {"variance", w.variance}};
}

inline json to_json(const SRWitness& w) {
  return std::visit([](const auto& x) { return to_json(x); }, w);
}

inline json to_json(const BoundWitness& w) {
  json out = {{"value", w.value}, {"bound", w.bound}};
  out["index"] = w.index ? json(*w.index + 1) : json(nullptr);
  return out;
}

inline json to_json(const CutWitness& w, std::size_t width) {
  return {{"blocked", patterns_to_json(w.blocked, width)},
          {"blocked_mass", w.blocked_mass},
          {"neighbours", patterns_to_json(w.neighbours, width)},
          {"neighbour_mass", w.neighbour_mass},
          {"deficit", w.deficit}};
}

inline json to_json(const CoveringCoupling& c) {
  json out = json::array();
  for (const auto& e : c.joint)
    out.push_back({{"y", mask_to_pattern(e.y, c.n)}, {"z", mask_to_pattern(e.z, c.n)}, {"mass", e.mass}});
  return out;
}

template <class W>
json verdict_to_json(const Verdict<W>& v) {
  json out = {{"status", to_string(v.status)}, {"budget_spent", v.budget_spent}, {"notes", v.notes}};
  out["witness"] = v.witness ? to_json(*v.witness) : json(nullptr);
  return out;
}

inline json to_json(const SRVerdict& v) {
  json out = verdict_to_json<SRWitness>(v);
  json stages = json::array();
  for (const auto& s : v.stages)
    stages.push_back({{"name", s.name}, {"status", s.skipped ? "skipped" : to_string(s.status)}, {"notes", s.notes}});
  out["stages"] = stages;
  return out;
}

inline json to_json(const ScpReport& r, bool with_couplings = true) {
  const std::size_t width = r.free_coords.size();
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    json item = {{"U", coords_to_json(p.u)}, {"V", coords_to_json(p.v)}, {"status", to_string(p.status)}};
    if (p.coupling && with_couplings) item["coupling"] = to_json(*p.coupling);
    if (p.cut) item["cut"] = to_json(*p.cut, width);
    pairs.push_back(std::move(item));
  }
  json skipped = json::array();
  for (const auto& [u, v] : r.skipped) skipped.push_back({{"U", coords_to_json(u)}, {"V", coords_to_json(v)}});
  return {{"status", to_string(r.status)}, {"free_coordinates", coords_to_json(r.free_coords)}, {"pairs", pairs}, {"skipped", skipped}};
}

inline json to_json(const CovProfile& p) {
  return {{"index", p.index + 1},
          {"ns", p.ns},
          {"partial_sums", p.partial_sums},
          {"growth_class", to_string(p.growth_class)},
          {"fit_exponent", p.fit_exponent},
          {"fit_r2", p.fit_r2},
          {"r2_by_model", p.r2_by_model},
          {"last_doubling_increment", p.last_doubling_increment}};
}

inline json to_json(const TailProfile& t) {
  return {{"head_size", t.head_size}, {"cut_points", t.cut_points}, {"values", t.values}};
}

inline json to_json(const OrthantResult& r) {
  return {{"probability", r.probability}, {"standard_error", r.standard_error}, {"method", to_string(r.method)}, {"samples", r.samples}};
}

inline json to_json(const CanonicalCorrelation& c) {
  return {{"value", c.value}, {"dropped_a", c.dropped_a}, {"dropped_b", c.dropped_b}};
}

inline json to_json(const ThresholdLaw& t) {
  return {{"law", law_to_json(t.law)},
          {"method", to_string(t.method)},
          {"samples", t.samples},
          {"max_stderr", t.max_stderr},
          {"max_adjustment", t.max_adjustment},
          {"noise_tolerance", t.noise_tolerance()}};
}

}  // namespace negdep::json_io

#endif  // NEGDEP_JSON_IO_HPP
