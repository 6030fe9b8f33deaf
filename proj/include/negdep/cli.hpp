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

#ifndef NEGDEP_CLI_HPP
#define NEGDEP_CLI_HPP

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "negdep/cov_diagnostics.hpp"
#include "negdep/gallery.hpp"
#include "negdep/gaussian.hpp"
#include "negdep/json_io.hpp"
#include "negdep/na_verify.hpp"
#include "negdep/scp_coupling.hpp"
#include "negdep/stable_check.hpp"

namespace negdep::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitHolds = 0, kExitFails = 1, kExitUsage = 2, kExitInconclusive = 3 };

inline int exit_code(Status s) {
  switch (s) {
    case Status::holds: return kExitHolds;
    case Status::fails: return kExitFails;
    case Status::inconclusive: return kExitInconclusive;
  }
  return kExitUsage;
}

/// A resolved positional input: a file or a `gallery:<name>` fixture.
struct Input {
  std::variant<BernoulliLaw, GaussianSpec, Eigen::MatrixXd> value;
  double na_tolerance = 1e-10;
  std::string method = "exact";
  const GalleryEntry* entry = nullptr;
  std::optional<std::size_t> gallery_n;
};

/// Usage or input problems; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxCliLawDimension = 24;

namespace detail {

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte points one past the offending character
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw UsageError(path + ":" + line_column(text, at) + ": malformed JSON (" + e.what() + ")");
  }
}

inline Input load_input(const std::string& source) {
  Input in;
  if (source.rfind("gallery:", 0) == 0) {
    const auto name = source.substr(8);
    const auto r = find_gallery(name);
    auto payload = build_gallery(name);
    in.entry = r.entry;
    in.gallery_n = r.n;
    in.na_tolerance = payload.na_tolerance;
    in.method = payload.method;
    if (auto* law = std::get_if<BernoulliLaw>(&payload.value))
      in.value = *law;
    else
      in.value = std::get<GaussianSpec>(payload.value);
    return in;
  }
  const auto j = read_json_file(source);
  if (j.is_object() && j.contains("pmf")) {
    auto law = json_io::law_from_json(j);
    if (law.n() > kMaxCliLawDimension)
      throw Error(ErrorCode::DimensionTooLarge, source + ": law dimension " + std::to_string(law.n()) + " exceeds " +
                                                    std::to_string(kMaxCliLawDimension));
    in.value = std::move(law);
  } else if (j.is_object() && j.contains("cov"))
    in.value = json_io::spec_from_json(j);
  else if (j.is_array() || (j.is_object() && j.contains("gram")))
    in.value = json_io::gram_from_json(j);
  else
    throw UsageError(source + ": expected a law {\"pmf\"}, a spec {\"cov\"} or a Gram matrix");
  return in;
}

inline const BernoulliLaw& need_law(const Input& in) {
  if (auto* law = std::get_if<BernoulliLaw>(&in.value)) return *law;
  throw UsageError("this command needs a Bernoulli law input");
}

inline const GaussianSpec& need_spec(const Input& in) {
  if (auto* spec = std::get_if<GaussianSpec>(&in.value)) return *spec;
  throw UsageError("this command needs a Gaussian spec input");
}

inline std::vector<std::size_t> zero_based(const std::vector<std::size_t>& one_based, const std::string& flag) {
  std::vector<std::size_t> out;
  for (auto c : one_based) {
    if (c == 0) throw UsageError(flag + ": coordinates are 1-based");
    out.push_back(c - 1);
  }
  return out;
}

inline StableBudget parse_budget(const std::string& text) {
  StableBudget b;
  if (text.empty() || text == "default") return b;
  try {
    std::size_t used = 0;
    const auto v = std::stoul(text, &used);
    if (used != text.size() || v == 0) throw UsageError("");
    b.starts_per_pair = v;
  } catch (const std::exception&) {
    throw UsageError("--budget expects a positive integer or 'default'");
  }
  return b;
}

// Covariance sequence for diagnose-cov: gallery families are regenerated per size; plain
// inputs use leading blocks of their single covariance matrix.
struct CovSource {
  CovSequence seq;
  bool nested = true;
  std::size_t available = 0;  // largest usable size; 0 when unbounded
};

inline CovSource cov_source(const Input& in) {
  if (in.entry && in.entry->spec_family) {
    const auto* e = in.entry;
    CovSource s;
    s.nested = e->nested;
    s.seq = [e](std::size_t n) {
      const auto spec = e->spec_family(std::max(n, e->min_n));
      const Eigen::MatrixXd cov = e->thresholded_family ? threshold_covariance_matrix(spec) : spec.cov;
      if (!e->nested) return cov;
      const auto k = static_cast<Eigen::Index>(n);
      return Eigen::MatrixXd(cov.topLeftCorner(k, k));
    };
    return s;
  }
  Eigen::MatrixXd full;
  if (auto* law = std::get_if<BernoulliLaw>(&in.value))
    full = covariance_matrix(*law);
  else if (auto* spec = std::get_if<GaussianSpec>(&in.value))
    full = spec->cov;
  else
    full = std::get<Eigen::MatrixXd>(in.value);
  CovSource s;
  s.available = static_cast<std::size_t>(full.rows());
  s.seq = [full](std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    return Eigen::MatrixXd(full.topLeftCorner(k, k));
  };
  return s;
}

}  // namespace detail

/// Parses argv-style arguments (without the program name), runs one subcommand, writes the
/// JSON report to `out` and a short summary to `err`. Returns the process exit code.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"negdep: negative dependence checks for Bernoulli laws and Gaussian threshold processes"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  std::optional<std::uint64_t> seed_flag;
  std::optional<double> tolerance;
  std::optional<double> precision;
  std::string budget_text = "default";
  std::string out_path;
  std::string input;
  app.add_option("--seed", seed_flag, "random seed (drawn and reported when omitted)");
  app.add_option("--out", out_path, "also write the report (or emitted fixture) to this file");

  auto add_input = [&](CLI::App* sub, const char* what) { sub->add_option("input", input, what)->required(); };

  auto* na = app.add_subcommand("check-na", "exact negative association check of a law");
  add_input(na, "law JSON or gallery:<name>");
  na->add_option("--tolerance", tolerance, "largest indicator covariance treated as zero");

  auto* sr = app.add_subcommand("check-sr", "strong Rayleigh screen and stability search");
  add_input(sr, "law JSON or gallery:<name>");
  sr->add_option("--budget", budget_text, "starts per coordinate pair, or 'default'");

  auto* tl = app.add_subcommand("threshold-law", "law of the threshold indicators of a Gaussian spec");
  add_input(tl, "spec JSON or gallery:<name>");
  tl->add_option("--precision", precision, "target standard error for Monte Carlo patterns");

  std::string pattern;
  auto* orth = app.add_subcommand("orthant", "probability of one threshold sign pattern");
  add_input(orth, "spec JSON or gallery:<name>");
  orth->add_option("--pattern", pattern, "bit string, character k is coordinate k+1")->required();
  orth->add_option("--precision", precision, "target standard error for Monte Carlo");

  std::vector<std::size_t> block_a, block_b;
  auto* mc = app.add_subcommand("maxcorr", "canonical correlation between two coordinate blocks");
  add_input(mc, "spec JSON or gallery:<name>");
  mc->add_option("--blockA", block_a, "1-based coordinates")->delimiter(',')->required();
  mc->add_option("--blockB", block_b, "1-based coordinates")->delimiter(',')->required();

  std::size_t head = 1;
  std::vector<std::size_t> cuts;
  auto* tp = app.add_subcommand("tailprofile", "projection of head vectors onto tail spans");
  add_input(tp, "Gram JSON, spec JSON or gallery:<name>");
  tp->add_option("--head", head, "number of head vectors")->required();
  tp->add_option("--cuts", cuts, "1-based tail start points")->delimiter(',')->required();

  std::size_t index = 1;
  std::optional<std::size_t> nmax;
  bool family_mode = false;
  auto* dc = app.add_subcommand("diagnose-cov", "absolute covariance row-sum profile and growth class");
  add_input(dc, "law, spec or Gram JSON, or gallery:<family>");
  dc->add_option("--index", index, "1-based row")->required();
  dc->add_option("--nmax", nmax, "largest size");
  dc->add_flag("--family", family_mode, "treat sizes as separate family members (full row sums)");

  std::vector<std::size_t> block;
  std::size_t tail_n = 0;
  auto* dec = app.add_subcommand("decorrelation", "|cov(|X on A|, |X on N..n|)|");
  add_input(dec, "law JSON or gallery:<name>");
  dec->add_option("--A", block, "1-based coordinates")->delimiter(',')->required();
  dec->add_option("--N", tail_n, "1-based start of the tail")->required();

  bool no_couplings = false;
  auto* scp = app.add_subcommand("scp", "stochastic covering property on a conditioning block");
  add_input(scp, "law JSON or gallery:<name>");
  scp->add_option("--B", block, "1-based conditioning coordinates")->delimiter(',')->required();
  scp->add_flag("--no-couplings", no_couplings, "omit coupling tables from the report");

  auto* gal = app.add_subcommand("gallery", "list or emit built-in fixtures");
  gal->require_subcommand(1);
  gal->add_subcommand("list", "list fixtures");
  auto* emit = gal->add_subcommand("emit", "write one fixture as JSON");
  std::string emit_name;
  std::optional<std::size_t> emit_n;
  emit->add_option("name", emit_name)->required();
  emit->add_option("--n", emit_n, "family size");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitHolds;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitHolds;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitHolds;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  const auto started = std::chrono::steady_clock::now();
  nlohmann::json report;
  report["command"] = args;
  report["version"] = kVersion;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
  if (seed_flag) {
    seed = *seed_flag;
  } else {
    seed = (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();
    warnings.push_back("no --seed given; drew seed " + std::to_string(seed));
    err << "seed: " << seed << "\n";
  }
  report["seed"] = seed;

  nlohmann::json result;
  int code = kExitHolds;
  std::string summary;
  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "check-na") {
      const auto in = detail::load_input(input);
      const auto& law = detail::need_law(in);
      double tol = 1e-10;
      if (tolerance) {
        tol = *tolerance;
      } else if (in.method == "monte_carlo") {
        tol = in.na_tolerance;
        warnings.push_back("Monte Carlo fixture: tolerance set to its sampling noise bound " + std::to_string(tol));
      }
      const auto v = check_na_exact(law, tol);
      result = json_io::verdict_to_json(v);
      result["tolerance"] = tol;
      result["pairs_checked"] = v.budget_spent.at("pairs_checked");
      code = exit_code(v.status);
      summary = std::string("negative association: ") + to_string(v.status);
    } else if (name == "check-sr") {
      const auto in = detail::load_input(input);
      const auto v = check_strongly_rayleigh(detail::need_law(in), detail::parse_budget(budget_text), seed);
      result = json_io::to_json(v);
      code = exit_code(v.status);
      summary = std::string("strongly Rayleigh: ") + to_string(v.status);
    } else if (name == "threshold-law") {
      const auto in = detail::load_input(input);
      const auto t = threshold_law(detail::need_spec(in), precision.value_or(1e-3), seed);
      result = json_io::to_json(t);
      summary = std::string("threshold law via ") + to_string(t.method);
    } else if (name == "orthant") {
      const auto in = detail::load_input(input);
      const auto r = orthant_probability({detail::need_spec(in), pattern}, OrthantMethod::automatic,
                                         precision.value_or(1e-4), seed);
      result = json_io::to_json(r);
      result["pattern"] = pattern;
      summary = "orthant probability " + std::to_string(r.probability);
    } else if (name == "maxcorr") {
      const auto in = detail::load_input(input);
      const auto c = max_linear_correlation(detail::need_spec(in), detail::zero_based(block_a, "--blockA"),
                                            detail::zero_based(block_b, "--blockB"));
      result = json_io::to_json(c);
      summary = "canonical correlation " + std::to_string(c.value);
    } else if (name == "tailprofile") {
      const auto in = detail::load_input(input);
      Eigen::MatrixXd gram;
      if (auto* g = std::get_if<Eigen::MatrixXd>(&in.value))
        gram = *g;
      else
        gram = detail::need_spec(in).cov;
      const auto t = tail_projection_profile(gram, head, cuts);
      result = json_io::to_json(t);
      summary = "tail projection profile over " + std::to_string(t.values.size()) + " cut(s)";
    } else if (name == "diagnose-cov") {
      const auto in = detail::load_input(input);
      const auto src = detail::cov_source(in);
      if (index == 0) throw UsageError("--index is 1-based");
      std::size_t n_max = nmax.value_or(src.available);
      if (n_max == 0) throw UsageError("--nmax is required for gallery families");
      if (src.available && n_max > src.available)
        throw Error(ErrorCode::OutOfRange, "--nmax exceeds the input dimension " + std::to_string(src.available));
      const bool as_family = family_mode || !src.nested;
      const auto profile = as_family ? family_row_sum_profile(src.seq, index - 1, std::max<std::size_t>(index, 1), n_max)
                                     : row_sum_profile(src.seq, index - 1, n_max);
      result = json_io::to_json(profile);
      result["mode"] = as_family ? "family" : "nested";
      summary = std::string("growth class ") + to_string(profile.growth_class);
    } else if (name == "decorrelation") {
      const auto in = detail::load_input(input);
      if (tail_n == 0) throw UsageError("--N is 1-based");
      const auto a = detail::zero_based(block, "--A");
      const double value = decorrelation_bound(detail::need_law(in), a, tail_n - 1);
      result = {{"value", value}, {"A", json_io::coords_to_json(a)}, {"N", tail_n}};
      summary = "decorrelation " + std::to_string(value);
    } else if (name == "scp") {
      const auto in = detail::load_input(input);
      const auto r = scp_check(detail::need_law(in), detail::zero_based(block, "--B"));
      result = json_io::to_json(r, !no_couplings);
      code = exit_code(r.status);
      summary = std::string("stochastic covering: ") + to_string(r.status);
    } else if (name == "gallery") {
      if (sub->got_subcommand("list")) {
        result = nlohmann::json::array();
        for (const auto& e : gallery()) {
          nlohmann::json item = {{"name", e.name},
                                 {"kind", e.kind == GalleryKind::gaussian_spec ? "gaussian_spec" : "bernoulli_law"},
                                 {"description", e.description}};
          item["default_n"] = e.default_n ? nlohmann::json(*e.default_n) : nlohmann::json(nullptr);
          nlohmann::json props = nlohmann::json::array();
          for (const auto& p : e.expected) props.push_back({{"checker", p.checker}, {"expected", p.expected}});
          item["expected_properties"] = props;
          result.push_back(std::move(item));
        }
        summary = std::to_string(gallery().size()) + " gallery entries";
      } else {
        const auto payload = build_gallery(emit_name, emit_n);
        nlohmann::json body = std::holds_alternative<BernoulliLaw>(payload.value)
                                  ? json_io::law_to_json(std::get<BernoulliLaw>(payload.value))
                                  : json_io::spec_to_json(std::get<GaussianSpec>(payload.value));
        result = {{"name", emit_name}, {"method", payload.method}, {"payload", body}};
        if (!out_path.empty()) {
          std::ofstream f(out_path);
          if (!f) throw UsageError("cannot write '" + out_path + "'");
          f << body.dump(2) << "\n";
          out_path.clear();
        }
        summary = "emitted " + emit_name;
      }
    }
  } catch (const UsageError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error[" << to_string(e.code()) << "]: " << e.what() << "\n";
    return e.code() == ErrorCode::PrecisionUnreachable ? kExitInconclusive : kExitUsage;
  } catch (const CLI::Error& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  report["result"] = result;
  report["warnings"] = warnings;
  report["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const std::string text = report.dump(2);
  out << text << "\n";
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) {
      err << "input error: cannot write '" << out_path << "'\n";
      return kExitUsage;
    }
    f << text << "\n";
  }
  err << summary << "\n";
  return code;
}

}  // namespace negdep::cli

#endif  // NEGDEP_CLI_HPP
