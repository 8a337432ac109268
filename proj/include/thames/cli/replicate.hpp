#pragma once

// Replication experiments behind `thames replicate`. Each writes one CSV into
// the output directory with one row per (replication, setting); rows are
// ordered by replication index whatever order the workers finish in.
//
// Seeding: replication i of an experiment runs under stream_seed(master, i);
// inside a replication, sub-streams 0, 1, 2 seed the data set, the posterior
// draws and the volume-ratio sample.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "thames/core.hpp"
#include "thames/correction.hpp"
#include "thames/estimator.hpp"
#include "thames/models.hpp"
#include "thames/radius.hpp"
#include "thames/rng.hpp"

namespace thames::cli {

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"gaussian-d", "gaussian-T", "dirmult", "prostate",
                                                 "toy-figure7"};
  return names;
}

struct ReplicateConfig {
  std::string experiment;
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  std::optional<std::size_t> reps;  // per-experiment default when absent
  std::vector<int> dims;            // empty: per-experiment default
  std::string prostate_path;        // prostate only
  double sigma2 = 1.0;              // prostate only
  std::size_t threads = 1;
};

/// THAMES_THREADS, or 1 when unset or unparsable.
inline std::size_t threads_from_env() {
  const char* v = std::getenv("THAMES_THREADS");
  if (v == nullptr) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  return (end != v && *end == '\0' && n >= 1) ? static_cast<std::size_t>(n) : 1;
}

/// Runs job(i) for i in [0, n) on up to `threads` workers. The first exception
/// is rethrown after all workers stop.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& job) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !stop; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
          stop = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

namespace detail {

inline std::string real(double v) {
  if (v == kNegInf) return "-inf";
  if (v == kPosInf) return "inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class... Ts>
std::string csv_row(const Ts&... fields) {
  std::string out;
  auto add = [&out](const auto& f) {
    if (!out.empty()) out += ',';
    using F = std::decay_t<decltype(f)>;
    if constexpr (std::is_same_v<F, double>) {
      out += real(f);
    } else if constexpr (std::is_same_v<F, bool>) {
      out += f ? "1" : "0";
    } else if constexpr (std::is_arithmetic_v<F>) {
      out += std::to_string(f);
    } else {
      out += f;
    }
  };
  (add(fields), ...);
  return out + '\n';
}

inline bool covers(const ThamesResult& r, double exact) {
  return r.ci_log_z.lower <= exact && exact <= r.ci_log_z.upper;
}

/// One estimator run; an estimator error becomes an "error" field instead of
/// aborting the experiment.
struct Outcome {
  std::optional<ThamesResult> result;
  std::string error;
};

inline Outcome run(const DrawMatrix& draws, const LogDensityVector& lp, const ThamesOptions& opts) {
  try {
    return Outcome{estimate(draws, lp, opts), ""};
  } catch (const Error& e) {
    return Outcome{std::nullopt, std::string(to_string(e.kind()))};
  }
}

constexpr const char* kResultHeader = "log_z_hat,error,se_recip_rel,ci_lower,ci_upper,covered,n_inside,status";

inline std::string result_fields(const Outcome& o, double exact) {
  if (!o.result) return "nan,nan,nan,nan,nan,0,0," + o.error;
  const ThamesResult& r = *o.result;
  return real(r.log_z) + ',' + real(r.log_z - exact) + ',' + real(r.se_recip_rel) + ',' +
         real(r.ci_log_z.lower) + ',' + real(r.ci_log_z.upper) + ',' + (covers(r, exact) ? "1" : "0") + ',' +
         std::to_string(r.n_inside) + ",ok";
}

inline void write_rows(const std::filesystem::path& path, const std::string& header,
                       const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::InvalidInput, "cannot write '" + path.string() + "'");
  out << header << '\n';
  for (const auto& r : rows) out << r;
}

inline models::GaussianMeanModel gaussian_model(int d, std::uint64_t data_seed) {
  return models::GaussianMeanModel{1.0, models::gaussian_dataset(d, 20, 2.0, data_seed)};
}

}  // namespace detail

/// Dimension sweep: d in dims (default 1, 2, 5, 10, 20, 50, 100), n = 20, s0 = 1,
/// mu = 2, T = 10000; variants no-split, split and oracle (exact posterior moments)
/// on the same data set and draws.
inline std::filesystem::path replicate_gaussian_d(const ReplicateConfig& cfg) {
  const std::vector<int> dims = cfg.dims.empty() ? std::vector<int>{1, 2, 5, 10, 20, 50, 100} : cfg.dims;
  const std::size_t reps = cfg.reps.value_or(50);
  constexpr std::size_t kT = 10000;
  std::vector<std::string> rows(dims.size() * reps);
  parallel_for(rows.size(), cfg.threads, [&](std::size_t i) {
    const int d = dims[i / reps];
    const std::size_t rep = i % reps;
    const std::uint64_t s = stream_seed(cfg.seed, i);
    const auto model = detail::gaussian_model(d, stream_seed(s, 0));
    const double exact = models::gaussian_exact_log_marginal(model);
    const DrawMatrix draws = models::gaussian_posterior_sample(model, kT, stream_seed(s, 1));
    const LogDensityVector lp = models::gaussian_log_post(model, draws);
    const auto post = models::gaussian_posterior_params(model);

    ThamesOptions no_split;
    no_split.split = false;
    ThamesOptions split;
    ThamesOptions oracle;
    oracle.oracle = OracleShape{post.mean, post.var * Matrix::Identity(d, d)};
    std::string out;
    const std::pair<const char*, ThamesOptions*> variants[] = {
        {"no-split", &no_split}, {"split", &split}, {"oracle", &oracle}};
    for (const auto& [name, opts] : variants) {
      out += std::to_string(d) + ',' + std::to_string(rep) + ',' + name + ',' + detail::real(exact) + ',' +
             detail::result_fields(detail::run(draws, lp, *opts), exact) + '\n';
    }
    rows[i] = out;
  });
  const auto path = cfg.out_dir / "gaussian-d.csv";
  detail::write_rows(path, std::string("d,rep,variant,log_z_exact,") + detail::kResultHeader, rows);
  return path;
}

/// d = 1, n = 20, s0 = 1, mu = 2: estimates on the cumulative prefixes
/// T = 5, 1005, ..., 9005 of one posterior sample, fitted on the whole prefix
/// (no split: T = 5 leaves too few draws to split).
inline std::filesystem::path replicate_gaussian_t(const ReplicateConfig& cfg) {
  const std::size_t reps = cfg.reps.value_or(1);
  std::vector<std::string> rows(reps);
  parallel_for(reps, cfg.threads, [&](std::size_t rep) {
    const std::uint64_t s = stream_seed(cfg.seed, rep);
    const auto model = detail::gaussian_model(1, stream_seed(s, 0));
    const double exact = models::gaussian_exact_log_marginal(model);
    const DrawMatrix draws = models::gaussian_posterior_sample(model, 9005, stream_seed(s, 1));
    const LogDensityVector lp = models::gaussian_log_post(model, draws);
    ThamesOptions opts;
    opts.split = false;
    std::string out;
    for (Eigen::Index t = 5; t <= 9005; t += 1000) {
      const auto o = detail::run(draws.topRows(t), lp.head(t), opts);
      out += std::to_string(rep) + ',' + std::to_string(t) + ',' + detail::real(exact) + ',' +
             detail::result_fields(o, exact) + '\n';
    }
    rows[rep] = out;
  });
  const auto path = cfg.out_dir / "gaussian-T.csv";
  detail::write_rows(path, std::string("rep,T,log_z_exact,") + detail::kResultHeader, rows);
  return path;
}

/// (n, l, T, a0) = (400, 150, 10000, 1), d in dims (default 1, 20, 50, 100).
/// "stochastic": one mu ~ Dirichlet(a0) per d shared by all data sets;
/// "fixed": mu uniform. Both report the volume-ratio corrected estimate (N = 100).
inline std::filesystem::path replicate_dirmult(const ReplicateConfig& cfg) {
  const std::vector<int> dims = cfg.dims.empty() ? std::vector<int>{1, 20, 50, 100} : cfg.dims;
  const std::size_t reps = cfg.reps.value_or(50);
  constexpr int kN = 400;
  constexpr int kL = 150;
  constexpr std::size_t kT = 10000;
  constexpr double kA0 = 1.0;
  const char* regimes[] = {"stochastic", "fixed"};
  std::vector<std::string> rows(2 * dims.size() * reps);
  parallel_for(rows.size(), cfg.threads, [&](std::size_t i) {
    const std::size_t regime = i / (dims.size() * reps);
    const std::size_t di = (i / reps) % dims.size();
    const std::size_t rep = i % reps;
    const int d = dims[di];
    const int K = d + 1;
    const Vector mu = regime == 0
                          ? models::random_simplex_point(K, kA0, stream_seed(stream_seed(cfg.seed, 1u << 30), di))
                          : Vector::Constant(K, 1.0 / K);
    const std::uint64_t s = stream_seed(cfg.seed, i);
    const models::DirMultModel model{K, kL, kA0, models::multinomial_dataset(mu, kN, kL, stream_seed(s, 0))};
    const double exact = models::dirmult_exact_log_marginal(model);
    const DrawMatrix draws = models::dirmult_posterior_sample(model, kT, stream_seed(s, 1));
    const LogDensityVector lp = models::dirmult_log_post(model, draws);

    ThamesOptions opts;
    const auto plain = detail::run(draws, lp, opts);
    opts.correction = ConstrainedCorrectionConfig{100, models::dirmult_support(model), stream_seed(s, 2), 0.95};
    const auto corrected = detail::run(draws, lp, opts);
    std::string out = std::string(regimes[regime]) + ',' + std::to_string(d) + ',' + std::to_string(rep) + ',' +
                      detail::real(exact) + ',' + detail::result_fields(plain, exact);
    if (corrected.result && plain.result) {
      out += ',' + detail::real(corrected.result->log_z) + ',' + detail::real(corrected.result->log_z - exact) +
             ',' + detail::real(*corrected.result->correction_ratio) + ',' +
             detail::real(corrected.result->log_z - plain.result->log_z) + ",ok\n";
    } else {
      out += ",nan,nan,nan,nan," + (corrected.error.empty() ? std::string("skipped") : corrected.error) + '\n';
    }
    rows[i] = out;
  });
  const auto path = cfg.out_dir / "dirmult.csv";
  detail::write_rows(path,
                     std::string("regime,d,rep,log_z_exact,") + detail::kResultHeader +
                         ",log_z_corrected,error_corrected,correction_ratio,correction_shift,correction_status",
                     rows);
  return path;
}

/// Models M2..M8 (lpsa on the first k predictors, no intercept), alpha = 1/2,
/// T = 10000 exact posterior draws per model.
inline std::filesystem::path replicate_prostate(const ReplicateConfig& cfg) {
  require(!cfg.prostate_path.empty(), ErrorKind::InvalidInput,
          "prostate experiment needs the fixture (--data or THAMES_PROSTATE_CSV)");
  const models::ProstateData data = models::load_prostate_csv(cfg.prostate_path);
  const std::size_t reps = cfg.reps.value_or(1);
  std::vector<std::string> rows(reps * 7);
  parallel_for(rows.size(), cfg.threads, [&](std::size_t i) {
    const std::size_t rep = i / 7;
    const int k = static_cast<int>(i % 7) + 2;
    const auto model = models::prostate_model(data, k, cfg.sigma2, 0.5);
    const double exact = models::linreg_exact_log_marginal(model);
    const DrawMatrix draws = models::linreg_posterior_sample(model, 10000, stream_seed(stream_seed(cfg.seed, i), 1));
    const LogDensityVector lp = models::linreg_log_post(model, draws);
    rows[i] = std::to_string(rep) + ",M" + std::to_string(k) + ',' + std::to_string(k) + ',' +
              detail::real(exact) + ',' + detail::result_fields(detail::run(draws, lp, {}), exact) + '\n';
  });
  const auto path = cfg.out_dir / "prostate.csv";
  detail::write_rows(path, std::string("rep,model,k,log_z_exact,") + detail::kResultHeader, rows);
  return path;
}

struct ToyTrace {
  std::vector<double> radii;                  // sqrt(3), 0.1 sqrt(3), 50 sqrt(3)
  std::vector<std::vector<double>> thames;    // running log 1/Z-hat per radius
  std::vector<double> harmonic;               // running log 1/Z-hat of the harmonic mean
  double log_recip_exact;
  std::vector<std::size_t> injected;          // 0-based rows holding the low-likelihood draws
};

/// d = 2 Gaussian model with every observation 0 (n = 20), T = 10000 exact draws;
/// rows 643 and 7215 are replaced by draws 7 posterior standard deviations
/// from the mean. One ellipsoid shape is fitted to the whole sample.
inline ToyTrace toy_figure7(std::uint64_t seed) {
  const models::GaussianMeanModel model{1.0, Matrix::Zero(20, 2)};
  const auto post = models::gaussian_posterior_params(model);
  DrawMatrix draws = models::gaussian_posterior_sample(model, 10000, stream_seed(seed, 1));
  const double sd = std::sqrt(post.var);
  ToyTrace out;
  out.injected = {643, 7215};
  const double angle[] = {0.7, 3.9};
  for (std::size_t j = 0; j < 2; ++j) {
    const auto row = static_cast<Eigen::Index>(out.injected[j]);
    draws(row, 0) = post.mean[0] + 7.0 * sd * std::cos(angle[j]);
    draws(row, 1) = post.mean[1] + 7.0 * sd * std::sin(angle[j]);
  }
  const LogDensityVector lp = models::gaussian_log_post(model, draws);
  const Vector ll = models::gaussian_log_likelihoods(model, draws);
  out.log_recip_exact = -models::gaussian_exact_log_marginal(model);
  const double base = std::sqrt(3.0);
  out.radii = {base, 0.1 * base, 50.0 * base};
  const Ellipsoid shape = Ellipsoid::fit(draws, base);
  for (double c : out.radii) out.thames.push_back(running_log_recip_z(shape.with_radius(c), draws, lp));
  const auto hm = running_harmonic_mean_log_z(std::vector<double>(ll.data(), ll.data() + ll.size()));
  for (double v : hm) out.harmonic.push_back(-v);
  return out;
}

inline std::filesystem::path replicate_toy(const ReplicateConfig& cfg) {
  const ToyTrace tr = toy_figure7(cfg.seed);
  std::vector<std::string> rows;
  rows.reserve(tr.harmonic.size());
  for (std::size_t t = 0; t < tr.harmonic.size(); ++t) {
    const bool injected = std::find(tr.injected.begin(), tr.injected.end(), t) != tr.injected.end();
    rows.push_back(detail::csv_row(t + 1, tr.thames[0][t], tr.thames[1][t], tr.thames[2][t], tr.harmonic[t],
                                   tr.log_recip_exact, injected));
  }
  const auto path = cfg.out_dir / "toy-figure7.csv";
  detail::write_rows(path,
                     "t,log_recip_thames_sqrt3,log_recip_thames_0.1sqrt3,log_recip_thames_50sqrt3,"
                     "log_recip_harmonic,log_recip_exact,injected",
                     rows);
  return path;
}

inline std::filesystem::path run_replicate(const ReplicateConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  if (cfg.experiment == "gaussian-d") return replicate_gaussian_d(cfg);
  if (cfg.experiment == "gaussian-T") return replicate_gaussian_t(cfg);
  if (cfg.experiment == "dirmult") return replicate_dirmult(cfg);
  if (cfg.experiment == "prostate") return replicate_prostate(cfg);
  if (cfg.experiment == "toy-figure7") return replicate_toy(cfg);
  fail(ErrorKind::InvalidInput, "unknown experiment '" + cfg.experiment + "'");
}

}  // namespace thames::cli
