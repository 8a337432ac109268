#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thames/cli/commands.hpp"

int main(int argc, char** argv) {
  namespace tc = thames::cli;

  CLI::App app{"Truncated harmonic mean estimator of the marginal likelihood"};
  app.require_subcommand(1);

  tc::EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "estimate log Z from a posterior-sample table");
  estimate->add_option("file", est.input, "CSV (or .jsonl) table of draws and log densities")->required();
  estimate->add_option("--radius", est.radius,
                       "sqrt_d_plus_1 | fixed:<c> | chisq_median | optimal | grid:<c1,c2,...>");
  estimate->add_flag("--no-split", est.no_split, "fit the ellipsoid on all draws");
  estimate->add_option("--ci", est.ci, "confidence level");
  estimate->add_flag("--ar1", est.ar1, "inflate the variance for lag-1 autocorrelation");
  estimate->add_flag("--ridge", est.ridge, "retry a singular covariance with a small ridge");
  estimate->add_option("--seed", est.seed, "seed (recorded in the report)");

  tc::EstimateArgs cor;
  std::string support;
  auto* correct = app.add_subcommand("correct", "estimate log Z with the bounded-support volume correction");
  correct->add_option("file", cor.input, "CSV (or .jsonl) table of draws and log densities")->required();
  correct->add_option("--support", support, "unbounded | positive:i,j | box:lo:hi,... | simplex[:i,j]")
      ->required();
  correct->add_option("--n", cor.n, "uniform ellipsoid samples for the volume ratio");
  correct->add_option("--seed", cor.seed, "seed of the volume-ratio sample");
  correct->add_option("--radius", cor.radius, "radius policy, as for estimate");
  correct->add_flag("--no-split", cor.no_split, "fit the ellipsoid on all draws");
  correct->add_option("--ci", cor.ci, "confidence level");
  correct->add_flag("--ar1", cor.ar1, "inflate the variance for lag-1 autocorrelation");

  tc::ScvArgs scv;
  auto* scv_cmd = app.add_subcommand("scv", "normal-theory SCV table as CSV");
  scv_cmd->add_option("--dmin", scv.dmin, "smallest dimension");
  scv_cmd->add_option("--dmax", scv.dmax, "largest dimension");
  scv_cmd->add_option("--policies", scv.policies,
                      "comma-separated: sqrt_d_plus_1, optimal, chisq_median, fixed:<c>, shift:<L>");

  tc::ReplicateConfig rep;
  std::string out_dir;
  std::size_t reps = 0;
  std::vector<int> dims;
  auto* replicate = app.add_subcommand("replicate", "run a replication experiment, writing CSV");
  replicate->add_option("experiment", rep.experiment, "gaussian-d | gaussian-T | dirmult | prostate | toy-figure7")
      ->required();
  replicate->add_option("--out", out_dir, "output directory")->required();
  replicate->add_option("--seed", rep.seed, "master seed");
  auto* reps_opt = replicate->add_option("--reps", reps, "replications (default depends on the experiment)");
  replicate->add_option("--dims", dims, "dimensions for gaussian-d / dirmult")->delimiter(',');
  replicate->add_option("--data", rep.prostate_path, "prostate fixture CSV");
  replicate->add_option("--sigma2", rep.sigma2, "prostate noise variance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tc::kExitUsage;
  }

  if (estimate->parsed()) return tc::cmd_estimate(est, std::cout);
  if (correct->parsed()) {
    cor.support = support;
    return tc::cmd_estimate(cor, std::cout);
  }
  if (scv_cmd->parsed()) return tc::cmd_scv(scv, std::cout, std::cerr);

  rep.out_dir = out_dir;
  if (reps_opt->count() > 0) rep.reps = reps;
  rep.dims = dims;
  rep.threads = tc::threads_from_env();
  if (rep.prostate_path.empty()) {
    if (const char* env = std::getenv("THAMES_PROSTATE_CSV")) rep.prostate_path = env;
  }
  return tc::cmd_replicate(rep, std::cout, std::cerr);
}
