#pragma once

// CSV and JSON serialization of trial records, sweep summaries and phase grids.
//
// Trial CSV columns (fixed order):
//   n,m,k,ensemble,snr_db,algorithm,alpha,beta,epsilon,k_max,seed,trial_index,
//   exact,nmse,runtime_seconds,status
// Fields that do not apply (snr_db for noiseless trials, alpha/beta for
// anything but FBP, epsilon for SP and l0) are left empty. For SP, k_max is
// the fixed support size k. Reals use the shortest round-trip representation.
//
// Phase CSV columns: lambda,rho,algo,successes,trials. Cells with K > M have
// an empty successes field.
//
// Non-finite reals in JSON are written as the strings "inf", "-inf", "nan".

#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <system_error>
#include <variant>

#include "json.hpp"

#include "fbp/experiments.hpp"
#include "fbp/pursuit.hpp"

namespace fbp {

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

inline nlohmann::json json_real(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

inline nlohmann::json json_real(const std::optional<double>& v) {
  if (!v) return nullptr;
  return json_real(*v);
}

/// Parameters of an algorithm config as they appear in CSV rows and manifests.
struct AlgorithmParams {
  std::optional<std::size_t> alpha;
  std::optional<std::size_t> beta;
  std::optional<double> epsilon;
  std::optional<std::size_t> k_max;
};

inline AlgorithmParams algorithm_params(const AlgorithmConfig& cfg) {
  AlgorithmParams p;
  if (const auto* f = std::get_if<FbpConfig>(&cfg)) {
    p = {f->alpha, f->beta, f->epsilon, f->k_max};
  } else if (const auto* o = std::get_if<OmpConfig>(&cfg)) {
    p.epsilon = o->epsilon;
    p.k_max = o->k_max;
  } else if (const auto* s = std::get_if<SpConfig>(&cfg)) {
    p.k_max = s->k;
  } else if (const auto* l = std::get_if<L0Config>(&cfg)) {
    p.k_max = l->k_max;
  }
  return p;
}

inline nlohmann::json to_json(const AlgorithmConfig& cfg) {
  nlohmann::json j;
  j["name"] = std::string(algorithm_name(cfg));
  const AlgorithmParams p = algorithm_params(cfg);
  if (p.alpha) j["alpha"] = *p.alpha;
  if (p.beta) j["beta"] = *p.beta;
  if (p.epsilon) j["epsilon"] = json_real(*p.epsilon);
  if (p.k_max) j["k_max"] = *p.k_max;
  if (const auto* f = std::get_if<FbpConfig>(&cfg))
    j["skip_backward_projection"] = f->skip_backward_projection;
  if (const auto* s = std::get_if<SpConfig>(&cfg)) j["max_iter"] = s->max_iter;
  return j;
}

inline constexpr const char* kTrialCsvHeader =
    "n,m,k,ensemble,snr_db,algorithm,alpha,beta,epsilon,k_max,seed,trial_index,"
    "exact,nmse,runtime_seconds,status";

/// One CSV row. With `with_timing` false the runtime column is written as 0 so
/// that reruns are byte-identical.
inline void write_trial_csv_row(std::ostream& os, const TrialRecord& r, bool with_timing = true) {
  const TrialSpec& s = r.spec;
  const AlgorithmParams p = algorithm_params(s.algorithm);
  auto opt_size = [](const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : std::string();
  };
  os << s.n << ',' << s.m << ',' << s.k << ',' << to_string(s.ensemble) << ','
     << (s.snr_db ? format_real(*s.snr_db) : std::string()) << ','
     << algorithm_name(s.algorithm) << ',' << opt_size(p.alpha) << ',' << opt_size(p.beta) << ','
     << (p.epsilon ? format_real(*p.epsilon) : std::string()) << ',' << opt_size(p.k_max) << ','
     << s.seed() << ',' << s.trial_index << ',' << (r.exact ? 1 : 0) << ',' << format_real(r.nmse)
     << ',' << format_real(with_timing ? r.runtime_seconds : 0.0) << ',' << to_string(r.status)
     << '\n';
}

inline void write_trial_csv(std::ostream& os, std::span<const TrialRecord> records,
                            bool with_timing = true) {
  os << kTrialCsvHeader << '\n';
  for (const auto& r : records) write_trial_csv_row(os, r, with_timing);
}

inline nlohmann::json to_json(const SweepPoint& p, bool with_timing = true) {
  return {{"k", p.k},
          {"snr_db", json_real(p.snr_db)},
          {"trial_count", p.trial_count},
          {"exact_count", p.exact_count},
          {"exact_rate", json_real(p.exact_rate)},
          {"anmse", json_real(p.anmse)},
          {"distortion_db", json_real(p.distortion_db)},
          {"mean_runtime_seconds", json_real(with_timing ? p.mean_runtime : 0.0)},
          {"mean_iterations", json_real(p.mean_iterations)}};
}

inline nlohmann::json to_json(const SweepSummary& s, bool with_timing = true) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : s.points) pts.push_back(to_json(p, with_timing));
  return {{"algorithm", s.algorithm}, {"points", pts}};
}

inline nlohmann::json to_json(const LogisticFit& f) {
  return {{"intercept", json_real(f.intercept)},
          {"slope", json_real(f.slope)},
          {"rho50", json_real(f.rho50)},
          {"converged", f.converged},
          {"degenerate", f.degenerate},
          {"boundary", json_real(f.boundary)},
          {"iterations", f.iterations}};
}

inline void write_phase_csv(std::ostream& os, const PhaseGrid& g) {
  os << "lambda,rho,algo,successes,trials\n";
  for (const auto& curve : g.curves) {
    for (std::size_t i = 0; i < g.lambda_grid.size(); ++i) {
      for (std::size_t j = 0; j < g.rho_grid.size(); ++j) {
        const auto& cell = curve.cells[i][j];
        os << format_real(g.lambda_grid[i]) << ',' << format_real(g.rho_grid[j]) << ','
           << curve.algorithm << ','
           << (cell.successes ? std::to_string(*cell.successes) : std::string()) << ','
           << g.trials_per_cell << '\n';
      }
    }
  }
}

inline nlohmann::json to_json(const PhaseGrid& g) {
  nlohmann::json j;
  j["n"] = g.n;
  j["ensemble"] = std::string(to_string(g.ensemble));
  j["trials_per_cell"] = g.trials_per_cell;
  j["lambda_grid"] = nlohmann::json::array();
  for (double l : g.lambda_grid) j["lambda_grid"].push_back(json_real(l));
  j["rho_grid"] = nlohmann::json::array();
  for (double r : g.rho_grid) j["rho_grid"].push_back(json_real(r));
  j["algorithms"] = nlohmann::json::array();
  for (const auto& c : g.curves) {
    nlohmann::json a;
    a["algorithm"] = c.algorithm;
    a["rho50"] = nlohmann::json::array();
    a["fits"] = nlohmann::json::array();
    for (std::size_t i = 0; i < c.rho50.size(); ++i) {
      a["rho50"].push_back(json_real(c.rho50[i]));
      a["fits"].push_back(to_json(c.fits[i]));
    }
    j["algorithms"].push_back(std::move(a));
  }
  return j;
}

}  // namespace fbp
