#pragma once

// The four subcommands as functions of parsed arguments, writing to a stream
// and returning the process exit code (0 ok, 2 usage, 3 parse, 4 numerical).

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "thames/cli/input_table.hpp"
#include "thames/cli/replicate.hpp"
#include "thames/cli/report.hpp"
#include "thames/cli/scv_table.hpp"
#include "thames/cli/support_spec.hpp"
#include "thames/estimator.hpp"

namespace thames::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;

struct EstimateArgs {
  std::string input;
  std::string radius = "sqrt_d_plus_1";
  bool no_split = false;
  double ci = 0.95;
  bool ar1 = false;
  std::uint64_t seed = 0;
  bool ridge = false;
  // correct only
  std::optional<std::string> support;
  std::size_t n = 100;
};

inline int cmd_estimate(const EstimateArgs& args, std::ostream& out) {
  ThamesOptions opts;
  try {
    opts.radius_policy = parse_radius_policy(args.radius);
    require(args.ci > 0.0 && args.ci < 1.0, ErrorKind::InvalidInput, "--ci must be in (0, 1)");
    require(args.n >= 1, ErrorKind::InvalidInput, "--n must be >= 1");
  } catch (const Error& e) {
    out << error_json(e.kind(), e.what()) << '\n';
    return kExitUsage;
  }
  opts.split = !args.no_split;
  opts.ci_level = args.ci;
  opts.ridge = args.ridge;
  if (args.ar1) opts.serial_correction = serial::AR1{};
  try {
    const InputTable table = load_input_table(args.input);
    if (args.support) {
      try {
        opts.correction = ConstrainedCorrectionConfig{args.n, parse_support(*args.support, table.draws.cols()),
                                                      args.seed, args.ci};
      } catch (const Error& e) {
        out << error_json(e.kind(), e.what()) << '\n';
        return kExitUsage;
      }
    }
    std::optional<ThamesResult> result;
    try {
      result = estimate(table.draws, table.log_post, opts);
    } catch (const Error& e) {
      // R-hat = 0: the normal-approximation interval degenerates to [0, 0].
      if (e.kind() != ErrorKind::ZeroSupportOverlap || !opts.correction) throw;
      out << error_json(e.kind(), e.what(),
                        "\"correction_ratio\":0,\"correction_ci\":{\"lower\":0,\"upper\":0},\"correction_n\":" +
                            std::to_string(args.n))
          << '\n';
      return exit_code(e.kind());
    }
    EstimateReport rep = make_report(*result);
    rep.ci_level = args.ci;
    rep.t_total = static_cast<std::size_t>(table.draws.rows());
    rep.radius_policy = args.radius;
    rep.split = !args.no_split;
    rep.seed = args.seed;
    rep.input_checksum = table.checksum;
    if (args.support) {
      rep.support = *args.support;
      rep.correction_n = args.n;
    }
    out << to_json(rep) << '\n';
    return kExitOk;
  } catch (const Error& e) {
    out << error_json(e.kind(), e.what()) << '\n';
    return exit_code(e.kind());
  }
}

struct ScvArgs {
  int dmin = 1;
  int dmax = 200;
  std::string policies = "sqrt_d_plus_1,optimal,chisq_median";
};

inline int cmd_scv(const ScvArgs& args, std::ostream& out, std::ostream& err) {
  try {
    write_scv_csv(out, scv_table(args.dmin, args.dmax, parse_scv_policies(args.policies)));
    return kExitOk;
  } catch (const Error& e) {
    err << error_json(e.kind(), e.what()) << '\n';
    return e.kind() == ErrorKind::InvalidInput ? kExitUsage : exit_code(e.kind());
  }
}

inline int cmd_replicate(const ReplicateConfig& cfg, std::ostream& out, std::ostream& err) {
  bool known = false;
  for (const auto& n : experiment_names()) known = known || n == cfg.experiment;
  if (!known) {
    err << error_json(ErrorKind::InvalidInput, "unknown experiment '" + cfg.experiment + "'") << '\n';
    return kExitUsage;
  }
  try {
    const auto path = run_replicate(cfg);
    out << nlohmann::json({{"experiment", cfg.experiment}, {"output", path.string()}}).dump() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err << error_json(e.kind(), e.what()) << '\n';
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << error_json(ErrorKind::InvalidInput, e.what()) << '\n';
    return 3;
  }
}

}  // namespace thames::cli
