// Command-line front end: single trials, sparsity sweeps (optionally noisy),
// phase-transition grids and block-wise image recovery.
//
// Exit codes: 0 success, 1 recovery failure under --strict, 2 usage or input
// error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fbp/experiments.hpp"
#include "fbp/imaging.hpp"
#include "fbp/io.hpp"
#include "fbp/pursuit.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kToolName = "pursuit";
constexpr const char* kToolVersion = "1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitRecoveryFailure = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "lo:hi:step" (inclusive) or a comma-separated list.
std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
      throw UsageError("bad range '" + text + "', expected lo:hi:step");
    const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) {
      const double v = parts[0] + static_cast<double>(i) * parts[2];
      out.push_back(std::round(v * 1e12) / 1e12);
    }
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      out.push_back(std::stod(item));
    }
  }
  if (out.empty()) throw UsageError("empty list '" + text + "'");
  return out;
}

std::vector<std::size_t> parse_count_range(const std::string& text) {
  std::vector<std::size_t> out;
  std::vector<long long> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    parts.push_back(std::stoll(item, &used));
    if (used != item.size()) throw UsageError("bad range '" + text + "'");
  }
  if (parts.size() == 2) parts.push_back(1);
  if (parts.size() != 3 || parts[0] < 0 || parts[1] < parts[0] || parts[2] <= 0)
    throw UsageError("bad range '" + text + "', expected lo:hi:step");
  for (long long k = parts[0]; k <= parts[1]; k += parts[2]) out.push_back(static_cast<std::size_t>(k));
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) return std::max(1u, *flag);
  if (const char* env = std::getenv("PURSUIT_THREADS")) {
    try {
      return std::max(1u, static_cast<unsigned>(std::stoul(env)));
    } catch (const std::exception&) {
      throw UsageError("PURSUIT_THREADS must be a positive integer");
    }
  }
  return 1;
}

// Output siblings: "dir/run.csv" -> "dir/run" + suffix.
std::string sibling(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  return (p.parent_path() / p.stem()).string() + suffix;
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json make_manifest(const std::string& command, const std::vector<std::string>& argv,
                   const json& parameters, std::uint64_t seed) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"command", command},
          {"argv", argv},
          {"parameters", parameters},
          {"master_seed", seed},
          {"timestamp", timestamp_utc()}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

// Algorithm flags shared by trial, sweep and image.
struct AlgoFlags {
  std::string algo = "fbp";
  std::optional<std::size_t> alpha;
  std::optional<std::size_t> beta;
  std::optional<double> eps;
  std::optional<std::size_t> kmax;
  bool skip_backward_projection = false;

  void add_to(CLI::App& app) {
    app.add_option("--algo", algo, "fbp | omp | sp | l0")
        ->check(CLI::IsMember({"fbp", "omp", "sp", "l0"}));
    app.add_option("--alpha", alpha, "FBP forward step (default round(0.2 M))");
    app.add_option("--beta", beta, "FBP backward step (default alpha - 1)");
    app.add_option("--eps", eps, "relative residual threshold (default 1e-6, or 10^(-snr/20) with --snr-db)");
    app.add_option("--kmax", kmax, "maximum support size (default M; l0 default min(k, 4))");
    app.add_flag("--skip-backward-projection", skip_backward_projection,
                 "FBP: reuse pruned coefficients instead of re-projecting");
  }

  // alpha_fraction sets the FBP forward step default relative to M.
  fbp::AlgorithmSpec spec(double alpha_fraction = 0.2, std::optional<std::size_t> default_kmax = {}) const {
    const AlgoFlags f = *this;
    return {algo, [f, alpha_fraction, default_kmax](const fbp::TrialContext& c) -> fbp::AlgorithmConfig {
              const double eps_default = c.snr_db ? fbp::noisy_epsilon(*c.snr_db) : 1e-6;
              if (f.algo == "fbp") {
                fbp::FbpConfig cfg;
                cfg.alpha = f.alpha.value_or(std::max<std::size_t>(
                    2, static_cast<std::size_t>(std::lround(alpha_fraction * static_cast<double>(c.m)))));
                cfg.beta = f.beta.value_or(cfg.alpha - 1);
                cfg.epsilon = f.eps.value_or(eps_default);
                cfg.k_max = f.kmax.value_or(default_kmax ? std::min(*default_kmax, c.m) : c.m);
                cfg.skip_backward_projection = f.skip_backward_projection;
                cfg.validate();
                return cfg;
              }
              if (f.algo == "omp") {
                fbp::OmpConfig cfg;
                cfg.epsilon = f.eps.value_or(eps_default);
                cfg.k_max = f.kmax.value_or(default_kmax ? std::min(*default_kmax, c.m) : c.m);
                cfg.validate();
                return cfg;
              }
              if (f.algo == "sp") {
                fbp::SpConfig cfg;
                cfg.k = f.kmax.value_or(std::max<std::size_t>(1, c.k));
                cfg.validate();
                return cfg;
              }
              fbp::L0Config cfg;
              cfg.k_max = f.kmax.value_or(std::min<std::size_t>(c.k, fbp::kL0MaxSparsity));
              return cfg;
            }};
  }
};

struct ProblemFlags {
  std::size_t n = 256;
  std::size_t m = 100;
  std::string ensemble = "gaussian";
  std::uint64_t seed = 0;
  std::optional<unsigned> threads;

  void add_to(CLI::App& app, bool require_dims) {
    auto* on = app.add_option("--n", n, "signal length N");
    auto* om = app.add_option("--m", m, "number of observations M");
    if (require_dims) {
      on->required();
      om->required();
    }
    app.add_option("--ensemble", ensemble, "gaussian | uniform | cars")
        ->check(CLI::IsMember({"gaussian", "uniform", "cars"}));
    app.add_option("--seed", seed, "master seed");
    app.add_option("--threads", threads, "worker threads (fallback: PURSUIT_THREADS)");
  }

  fbp::Ensemble parsed_ensemble() const { return *fbp::parse_ensemble(ensemble); }

  void validate(std::size_t k) const {
    if (n < 1 || m < 1) throw UsageError("--n and --m must be positive");
    if (k > n) throw UsageError("--k must not exceed --n");
  }
};

std::vector<std::string> g_argv;

// ---------------------------------------------------------------------------

int cmd_trial(const ProblemFlags& pf, const AlgoFlags& af, std::size_t k,
              std::optional<double> snr_db, bool strict) {
  pf.validate(k);
  fbp::TrialSpec spec;
  spec.n = pf.n;
  spec.m = pf.m;
  spec.k = k;
  spec.ensemble = pf.parsed_ensemble();
  spec.snr_db = snr_db;
  spec.algorithm = af.spec().make({pf.n, pf.m, k, snr_db});
  spec.master_seed = pf.seed;
  spec.group = k;
  spec.trial_index = 0;

  const fbp::TrialRecord rec = fbp::run_trial(spec);
  json out;
  out["algorithm"] = fbp::to_json(spec.algorithm);
  out["n"] = spec.n;
  out["m"] = spec.m;
  out["k"] = spec.k;
  out["ensemble"] = pf.ensemble;
  out["snr_db"] = fbp::json_real(snr_db);
  out["seed"] = spec.seed();
  out["support"] = rec.recovered_support.indices();
  out["true_support"] = rec.true_support.indices();
  out["nmse"] = fbp::json_real(rec.nmse);
  out["exact"] = rec.exact;
  out["iterations"] = rec.iterations;
  out["residual_norm"] = fbp::json_real(rec.residual_norm);
  out["status"] = std::string(fbp::to_string(rec.status));
  out["manifest"] = make_manifest("trial", g_argv, {{"algorithm", fbp::to_json(spec.algorithm)}}, pf.seed);
  std::cout << out.dump(2) << '\n';
  if (strict && rec.status != fbp::RecoveryStatus::Converged) return kExitRecoveryFailure;
  return kExitOk;
}

int cmd_sweep(const ProblemFlags& pf, const AlgoFlags& af, const std::string& k_range,
              const std::string& snr_list, std::size_t trials, const std::string& out_path,
              bool no_timing, bool strict) {
  fbp::SweepPlan plan;
  plan.n = pf.n;
  plan.m = pf.m;
  plan.ensemble = pf.parsed_ensemble();
  plan.k_values = parse_count_range(k_range);
  for (std::size_t k : plan.k_values) pf.validate(k);
  if (!snr_list.empty()) {
    plan.snr_values.clear();
    for (double s : parse_real_list(snr_list)) plan.snr_values.emplace_back(s);
  }
  if (trials < 1) throw UsageError("--trials must be positive");
  plan.trials = trials;
  plan.algorithm = af.spec();
  plan.master_seed = pf.seed;
  plan.threads = resolve_threads(pf.threads);

  const fbp::SweepResult res = fbp::run_sweep(plan);

  std::ostringstream csv;
  fbp::write_trial_csv(csv, res.records, !no_timing);
  write_text(out_path, csv.str());
  write_text(sibling(out_path, ".summary.json"), fbp::to_json(res.summary, !no_timing).dump(2) + "\n");

  json params = {{"n", plan.n}, {"m", plan.m}, {"ensemble", pf.ensemble},
                 {"k_values", plan.k_values}, {"trials", trials}, {"algo", af.algo},
                 {"timing", !no_timing}};
  params["snr_db"] = json::array();
  for (const auto& s : plan.snr_values) params["snr_db"].push_back(fbp::json_real(s));
  write_text(sibling(out_path, ".manifest.json"),
             make_manifest("sweep", g_argv, params, pf.seed).dump(2) + "\n");

  std::cout << fbp::to_json(res.summary, !no_timing).dump(2) << '\n';
  if (strict) {
    for (const auto& r : res.records)
      if (r.status == fbp::RecoveryStatus::IllPosedProjection) return kExitRecoveryFailure;
  }
  return kExitOk;
}

int cmd_phase(const ProblemFlags& pf, const std::string& lambda_grid, const std::string& rho_grid,
              std::size_t trials, const std::string& algos, double alpha_frac,
              std::optional<double> beta_frac, const std::string& out_path) {
  fbp::PhasePlan plan;
  plan.n = pf.n;
  plan.ensemble = pf.parsed_ensemble();
  plan.lambda_grid = parse_real_list(lambda_grid);
  plan.rho_grid = rho_grid.empty() ? fbp::default_rho_grid() : parse_real_list(rho_grid);
  for (double l : plan.lambda_grid)
    if (!(l > 0.0 && l <= 1.0)) throw UsageError("lambda values must lie in (0, 1]");
  for (double r : plan.rho_grid)
    if (!(r > 0.0 && r <= 1.0)) throw UsageError("rho values must lie in (0, 1]");
  if (trials < 1) throw UsageError("--trials must be positive");
  if (pf.n < 10) throw UsageError("--n must be at least 10");
  plan.trials = trials;
  plan.master_seed = pf.seed;
  plan.threads = resolve_threads(pf.threads);

  for (const std::string& name : split(algos, ',')) {
    if (name == "fbp") {
      plan.algorithms.push_back({"fbp", [alpha_frac, beta_frac](const fbp::TrialContext& c) {
                                   fbp::FbpConfig cfg;
                                   cfg.alpha = std::max<std::size_t>(
                                       2, static_cast<std::size_t>(std::lround(alpha_frac * static_cast<double>(c.m))));
                                   cfg.beta = beta_frac ? std::clamp<std::size_t>(
                                                              static_cast<std::size_t>(std::lround(*beta_frac * static_cast<double>(cfg.alpha))),
                                                              1, cfg.alpha - 1)
                                                        : cfg.alpha - 1;
                                   cfg.epsilon = 1e-6;
                                   cfg.k_max = c.m;
                                   return fbp::AlgorithmConfig{cfg};
                                 }});
    } else if (name == "omp") {
      plan.algorithms.push_back({"omp", [](const fbp::TrialContext& c) {
                                   fbp::OmpConfig cfg;
                                   cfg.epsilon = 1e-6;
                                   cfg.k_max = c.m;
                                   return fbp::AlgorithmConfig{cfg};
                                 }});
    } else if (name == "sp") {
      plan.algorithms.push_back({"sp", [](const fbp::TrialContext& c) {
                                   fbp::SpConfig cfg;
                                   cfg.k = c.k;
                                   return fbp::AlgorithmConfig{cfg};
                                 }});
    } else {
      throw UsageError("unknown algorithm '" + name + "' in --algos (fbp, omp, sp)");
    }
  }
  if (plan.algorithms.empty()) throw UsageError("--algos is empty");

  const fbp::PhaseGrid grid = fbp::phase_transition(plan);
  std::ostringstream csv;
  fbp::write_phase_csv(csv, grid);
  write_text(out_path, csv.str());
  const json rho = fbp::to_json(grid);
  write_text(sibling(out_path, ".rho50.json"), rho.dump(2) + "\n");
  json params = {{"n", plan.n}, {"ensemble", pf.ensemble}, {"lambda_grid", plan.lambda_grid},
                 {"rho_grid", plan.rho_grid}, {"trials", trials}, {"algos", algos},
                 {"alpha_frac", alpha_frac}};
  params["beta_frac"] = fbp::json_real(beta_frac);
  write_text(sibling(out_path, ".manifest.json"),
             make_manifest("phase", g_argv, params, pf.seed).dump(2) + "\n");
  std::cout << rho.dump(2) << '\n';
  return kExitOk;
}

int cmd_image(const std::string& in_path, bool synthetic, std::size_t width, std::size_t height,
              std::size_t k, std::size_t m, const AlgoFlags& af, std::uint64_t seed,
              std::optional<unsigned> threads, const std::string& out_path, bool strict) {
  if (in_path.empty() == !synthetic) throw UsageError("give exactly one of --in or --synthetic");
  if (k < 1 || k > fbp::kBlockPixels) throw UsageError("--k must lie in [1, 64]");
  if (m < 1 || m > fbp::kBlockPixels) throw UsageError("--m must lie in [1, 64]");

  fbp::GrayImage source;
  if (synthetic) {
    source = fbp::synthetic_image(width, height, seed);
  } else {
    try {
      source = fbp::read_pgm(in_path);
    } catch (const fbp::PgmError& e) {
      throw UsageError(e.what());
    }
  }
  fbp::require_block_dims(source);

  const fbp::GrayImage reference = fbp::sparsify_blocks(source, k);
  const fbp::AlgorithmConfig alg = af.spec(0.3, 20).make({fbp::kBlockPixels, m, k, std::nullopt});
  fbp::ImageRecoveryOptions opts;
  opts.threads = resolve_threads(threads);
  opts.solve_determined_directly = true;
  const fbp::ImageRecovery rec = fbp::recover_image(reference, m, alg, seed, opts);

  const fbp::GrayImage ref_q = reference.quantized();
  const fbp::GrayImage rec_q = rec.image.quantized();
  fbp::write_pgm(out_path, rec_q);
  const std::string ref_path = sibling(out_path, ".sparse.pgm");
  fbp::write_pgm(ref_path, ref_q);

  json status_counts = json::object();
  for (auto s : rec.statuses) {
    const std::string key(fbp::to_string(s));
    status_counts[key] = status_counts.value(key, 0) + 1;
  }
  json report = {{"width", source.width},
                 {"height", source.height},
                 {"k", k},
                 {"m", m},
                 {"algorithm", fbp::to_json(alg)},
                 {"blocks", rec.statuses.size()},
                 {"direct_blocks", rec.direct_blocks},
                 {"block_statuses", status_counts},
                 {"psnr_db", fbp::json_real(fbp::psnr(ref_q, rec_q))},
                 {"psnr_unquantized_db", fbp::json_real(fbp::psnr(reference, rec.image))},
                 {"reference", ref_path},
                 {"reconstruction", out_path}};
  write_text(sibling(out_path, ".report.json"), report.dump(2) + "\n");
  json params = {{"k", k}, {"m", m}, {"synthetic", synthetic}, {"in", in_path},
                 {"width", source.width}, {"height", source.height}, {"algorithm", fbp::to_json(alg)}};
  write_text(sibling(out_path, ".manifest.json"),
             make_manifest("image", g_argv, params, seed).dump(2) + "\n");
  std::cout << report.dump(2) << '\n';
  if (strict) {
    for (auto s : rec.statuses)
      if (s == fbp::RecoveryStatus::IllPosedProjection) return kExitRecoveryFailure;
  }
  return kExitOk;
}

int run(std::vector<std::string> args);

int cmd_replay(const std::string& manifest_path, const std::string& out_override) {
  std::ifstream in(manifest_path);
  if (!in) throw UsageError("cannot read " + manifest_path);
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed manifest: ") + e.what());
  }
  if (!manifest.contains("argv") || !manifest["argv"].is_array())
    throw UsageError("manifest has no argv");
  auto args = manifest["argv"].get<std::vector<std::string>>();
  if (!out_override.empty()) {
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--out") args[i + 1] = out_override;
  }
  return run(std::move(args));
}

int run(std::vector<std::string> args) {
  g_argv = args;
  CLI::App app{"Greedy sparse recovery (FBP, OMP, SP) and benchmark harness", kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  // trial
  ProblemFlags trial_pf;
  AlgoFlags trial_af;
  std::size_t trial_k = 0;
  std::optional<double> trial_snr;
  bool trial_strict = false;
  auto* trial = app.add_subcommand("trial", "recover one seeded instance and print JSON");
  trial_pf.add_to(*trial, true);
  trial_af.add_to(*trial);
  trial->add_option("--k", trial_k, "sparsity K")->required();
  trial->add_option("--snr-db", trial_snr, "add white Gaussian noise at this SNR");
  trial->add_flag("--strict", trial_strict, "exit 1 unless the recovery converged");

  // sweep
  ProblemFlags sweep_pf;
  AlgoFlags sweep_af;
  std::string k_range;
  std::string snr_list;
  std::size_t sweep_trials = 500;
  std::string sweep_out;
  bool no_timing = false;
  bool sweep_strict = false;
  auto* sweep = app.add_subcommand("sweep", "exact-recovery / ANMSE / runtime sweep over K (and SNR)");
  sweep_pf.add_to(*sweep, false);
  sweep_af.add_to(*sweep);
  sweep->add_option("--k-range", k_range, "lo:hi:step")->required();
  sweep->add_option("--snr-db", snr_list, "SNR list or lo:hi:step (noisy sweep)");
  sweep->add_option("--trials", sweep_trials, "trials per point");
  sweep->add_option("--out", sweep_out, "trial CSV path")->required();
  sweep->add_flag("--no-timing", no_timing, "write zero runtimes for byte-reproducible output");
  sweep->add_flag("--strict", sweep_strict, "exit 1 if any trial hit an ill-posed projection");

  // phase
  ProblemFlags phase_pf;
  phase_pf.n = 250;
  std::string lambda_grid = "0.1:0.9:0.1";
  std::string rho_grid;
  std::size_t phase_trials = 200;
  std::string algos = "fbp,omp,sp";
  double alpha_frac = 0.2;
  std::optional<double> beta_frac;
  std::string phase_out;
  auto* phase = app.add_subcommand("phase", "phase-transition grid with logistic 50% crossings");
  phase->add_option("--n", phase_pf.n, "signal length N");
  phase->add_option("--ensemble", phase_pf.ensemble, "gaussian | uniform | cars")
      ->check(CLI::IsMember({"gaussian", "uniform", "cars"}));
  phase->add_option("--seed", phase_pf.seed, "master seed");
  phase->add_option("--threads", phase_pf.threads, "worker threads (fallback: PURSUIT_THREADS)");
  phase->add_option("--lambda-grid", lambda_grid, "M/N values: list or lo:hi:step");
  phase->add_option("--rho-grid", rho_grid, "K/M values: list or lo:hi:step (default 0.05:1:0.05)");
  phase->add_option("--trials", phase_trials, "trials per cell");
  phase->add_option("--algos", algos, "comma list of fbp, omp, sp");
  phase->add_option("--alpha-frac", alpha_frac, "FBP alpha as a fraction of M");
  phase->add_option("--beta-frac", beta_frac, "FBP beta as a fraction of alpha (default alpha - 1)");
  phase->add_option("--out", phase_out, "phase CSV path")->required();

  // image
  std::string in_path;
  bool synthetic = false;
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t image_k = 12;
  std::size_t image_m = 32;
  AlgoFlags image_af;
  std::uint64_t image_seed = 0;
  std::optional<unsigned> image_threads;
  std::string image_out;
  bool image_strict = false;
  auto* image = app.add_subcommand("image", "block-wise 8x8 Haar-sparse image recovery");
  image->add_option("--in", in_path, "binary PGM (P5) input");
  image->add_flag("--synthetic", synthetic, "use a seeded piecewise-constant test image");
  image->add_option("--width", width, "synthetic image width");
  image->add_option("--height", height, "synthetic image height");
  image->add_option("--k", image_k, "coefficients kept per block");
  image->add_option("--m", image_m, "observations per block");
  image_af.add_to(*image);
  image->add_option("--seed", image_seed, "master seed");
  image->add_option("--threads", image_threads, "worker threads (fallback: PURSUIT_THREADS)");
  image->add_option("--out", image_out, "reconstruction PGM path")->required();
  image->add_flag("--strict", image_strict, "exit 1 if any block hit an ill-posed projection");

  // replay
  std::string manifest_path;
  std::string replay_out;
  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option("manifest", manifest_path, "manifest JSON")->required();
  replay->add_option("--out", replay_out, "override the recorded --out path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    std::cout << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    CLI::App* sub = nullptr;
    for (auto* s : app.get_subcommands()) sub = s;
    std::cerr << (sub ? sub->help() : app.help());
    return kExitUsage;
  }

  if (trial->parsed()) return cmd_trial(trial_pf, trial_af, trial_k, trial_snr, trial_strict);
  if (sweep->parsed())
    return cmd_sweep(sweep_pf, sweep_af, k_range, snr_list, sweep_trials, sweep_out, no_timing,
                     sweep_strict);
  if (phase->parsed())
    return cmd_phase(phase_pf, lambda_grid, rho_grid, phase_trials, algos, alpha_frac, beta_frac,
                     phase_out);
  if (image->parsed())
    return cmd_image(in_path, synthetic, width, height, image_k, image_m, image_af, image_seed,
                     image_threads, image_out, image_strict);
  if (replay->parsed()) return cmd_replay(manifest_path, replay_out);
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(std::move(args));
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fbp::BadDimensions& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
