// mdlvq: design, label, simulate and check multiple-description lattice quantizers.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdlvq/config.hpp"
#include "mdlvq/errors.hpp"
#include "mdlvq/io.hpp"
#include "mdlvq/pipeline.hpp"
#include "mdlvq/verify.hpp"

namespace {

using namespace mdlvq;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitVerify = 3;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> vectors;
  std::optional<std::int64_t> cap;
  std::string sweep_param;
  std::string sweep_values;
  std::vector<std::string> reports;
};

ExperimentConfig load(const Options& opt) {
  if (opt.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig cfg = load_config(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.vectors) {
    if (*opt.vectors < 1) throw ConfigError("--n must be at least 1");
    cfg.vectors = *opt.vectors;
  }
  if (opt.cap) {
    if (*opt.cap < 1) throw ConfigError("--cap must be at least 1");
    cfg.cap = *opt.cap;
  }
  if (!opt.out.empty()) cfg.out = opt.out;
  return cfg;
}

/// Writes through `emit` to cfg.out, or to stdout when no path is set.
template <class F>
void write_output(const std::string& path, F&& emit) {
  if (path.empty() || path == "-") {
    emit(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  emit(out);
  if (!out) throw ConfigError("error while writing '" + path + "'");
}

/// Human-readable lines go to stdout when the data goes to a file, otherwise to stderr.
std::ostream& log_stream(const std::string& path) { return path.empty() || path == "-" ? std::cerr : std::cout; }

void warn_psi(const ResolvedDesign& d) {
  if (!d.psi_known)
    std::cerr << "warning: no known expansion factor for this dimension and K; using psi = " << d.psi
              << " (set 'psi' to override)\n";
}

void print_design(std::ostream& os, const ExperimentConfig& cfg, const ResolvedDesign& d) {
  const DesignParams& p = d.params;
  char buf[32];
  auto line = [&](const std::string& name, double v) {
    char text[96];
    std::snprintf(text, sizeof text, "%-18s %.10g\n", name.c_str(), v);
    os << text;
  };
  os << "lattice            " << name_of(cfg.lattice) << ", K = " << cfg.K() << "\n";
  if (cfg.rstar) line("R* (bits/dim)", *cfg.rstar);
  line("psi", d.psi);
  if (cfg.rstar) line("tau*", p.tau);
  if (!d.explicit_indices) {
    line("nu (optimal)", p.nu_opt);
    for (std::size_t i = 0; i < p.indices_opt.size(); ++i) {
      std::snprintf(buf, sizeof buf, "N_%zu (optimal)", i);
      line(buf, p.indices_opt[i]);
    }
  }
  os << "N (used)           " << join_indices(d.indices) << "\n";
  line(d.explicit_indices && cfg.nu ? "nu (given)" : "nu (rescaled)", d.nu);
  line("R_c", p.rates_snapped.central);
  for (std::size_t i = 0; i < p.rates_snapped.side.size(); ++i) {
    std::snprintf(buf, sizeof buf, "R_%zu", i);
    line(buf, p.rates_snapped.side[i]);
  }
  line("sum R_i", p.rates_snapped.side_sum());
  line("D central", p.predicted.central);
  line("D side", p.predicted.side);
  line("D none", p.predicted.zero);
  line("D total", p.predicted.total);
}

int cmd_design(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const ResolvedDesign d = resolve_design(cfg);
  warn_psi(d);
  print_design(std::cout, cfg, d);
  if (!cfg.out.empty()) write_output(cfg.out, [&](std::ostream& os) { write_design_csv(os, cfg, d); });
  return kExitOk;
}

void print_assignment_summary(std::ostream& os, const IndexAssignment& asg) {
  os << "N_pi = " << asg.size() << ", total cost = " << detail::format_exact(asg.total_cost()) << "\n";
  const SubsetMask full = (SubsetMask{1} << asg.K()) - 1;
  for (SubsetMask m = 1; m < full; ++m)
    os << "side distortion " << mask_label(m, asg.K()) << " = " << detail::format_exact(asg.side_distortion(m)) << "\n";
}

int cmd_assign(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const ResolvedDesign d = resolve_design(cfg);
  warn_psi(d);
  const auto asg = build_assignment(cfg, d);
  const std::string path = !opt.out.empty() ? opt.out : cfg.assignment;
  write_output(path, [&](std::ostream& os) { write_assignment(os, *asg); });
  print_assignment_summary(log_stream(path), *asg);
  return kExitOk;
}

/// Loads the configured assignment file and checks that it matches the design the config describes.
std::shared_ptr<const IndexAssignment> assignment_for(const ExperimentConfig& cfg, const ResolvedDesign& d) {
  if (cfg.assignment.empty()) return build_assignment(cfg, d);
  auto asg = std::make_shared<const IndexAssignment>(load_assignment(cfg.assignment));
  const LatticeSetup& s = asg->setup();
  std::string mismatch;
  if (s.central.kind() != cfg.lattice) mismatch = "lattice";
  else if (asg->K() != cfg.K()) mismatch = "K";
  else if (s.indices() != d.indices) mismatch = "index values";
  else if (detail::relative_error(s.nu(), d.nu) > 1e-12) mismatch = "nu";
  if (!mismatch.empty())
    throw ConfigError("assignment file '" + cfg.assignment + "' does not match the configuration (" + mismatch + ")");
  return asg;
}

int cmd_simulate(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  const ResolvedDesign d = resolve_design(cfg);
  warn_psi(d);
  const auto asg = assignment_for(cfg, d);
  const SimReport rep = simulate(cfg, asg);
  write_output(cfg.out, [&](std::ostream& os) { write_simulation_csv(os, cfg, *asg, rep); });
  log_stream(cfg.out) << "n = " << rep.vectors << ", empirical = " << detail::format_exact(rep.empirical_total) << " +- "
                      << detail::format_exact(rep.std_error) << ", predicted = " << detail::format_exact(rep.predicted.total) << "\n";
  return kExitOk;
}

int cmd_sweep(const Options& opt) {
  const ExperimentConfig cfg = load(opt);
  if (opt.sweep_param.empty()) throw ConfigError("--sweep-param is required");
  if (opt.sweep_values.empty()) throw ConfigError("--sweep-values is required");
  std::vector<double> values;
  try {
    values = detail::parse_doubles(opt.sweep_values);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("--sweep-values: ") + e.what());
  }
  const auto points = sweep(cfg, opt.sweep_param, values);
  write_output(cfg.out, [&](std::ostream& os) { write_sweep_csv(os, cfg, opt.sweep_param, points); });
  std::ostream& log = log_stream(cfg.out);
  for (const SweepPoint& pt : points)
    log << opt.sweep_param << " = " << pt.value << ": N = " << join_indices(pt.design.indices)
        << ", empirical = " << pt.report.empirical_total << ", predicted = " << pt.report.predicted.total << "\n";
  return kExitOk;
}

void print_check(const CheckResult& r) {
  std::printf("%-4s %-28s %s\n", r.passed ? "ok" : "FAIL", r.name.c_str(), r.detail.c_str());
}

int cmd_verify(const Options& opt) {
  bool ok = true;
  auto record = [&](const CheckResult& r) {
    print_check(r);
    ok = ok && r.passed;
  };
  if (opt.reports.empty()) {
    record(check_subset_identity());
    record(check_normalization());
    record(check_optimal_nu());
    const auto rows = pairwise_trend({5, 9, 13, 25, 29});
    std::printf("\n%6s %14s %14s %10s\n", "N", "measured", "predicted", "ratio");
    for (const auto& r : rows) std::printf("%6lld %14.8g %14.8g %10.6f\n", static_cast<long long>(r.index), r.measured,
                                           r.predicted, r.ratio);
    std::printf("\n");
    record(check_pairwise_trend(rows));
  }
  for (const std::string& path : opt.reports) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open report '" + path + "'");
    CheckResult r = validate_report(read_csv_report(in, path));
    r.name = path;
    record(r);
  }
  return ok ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple-description lattice vector quantizer toolkit"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "configuration file (key = value lines)")->required();
    sub->add_option("--out", opt.out, "output path (default: the config's 'out', else stdout)");
    sub->add_option("--cap", opt.cap, "largest N_pi to label");
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--seed", opt.seed, "random seed");
    sub->add_option("--n", opt.vectors, "number of source vectors");
  };

  CLI::App* design = app.add_subcommand("design", "optimal nu and index values, predicted distortion");
  add_common(design);
  CLI::App* assign_cmd = app.add_subcommand("assign", "build and write the index assignment table");
  add_common(assign_cmd);
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte-Carlo run over the erasure channel");
  add_common(simulate_cmd);
  add_sim(simulate_cmd);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "re-design and simulate over a range of one parameter");
  add_common(sweep_cmd);
  add_sim(sweep_cmd);
  sweep_cmd->add_option("--sweep-param", opt.sweep_param, "p<i> or rstar")->required();
  sweep_cmd->add_option("--sweep-values", opt.sweep_values, "comma-separated values")->required();
  CLI::App* verify_cmd = app.add_subcommand("verify", "run the self-checks, or re-validate reports");
  verify_cmd->add_option("--report", opt.reports, "CSV report to re-validate (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*design) return cmd_design(opt);
    if (*assign_cmd) return cmd_assign(opt);
    if (*simulate_cmd) return cmd_simulate(opt);
    if (*sweep_cmd) return cmd_sweep(opt);
    if (*verify_cmd) return cmd_verify(opt);
  } catch (const InfeasibleDesignError& e) {
    std::cerr << "infeasible design: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const DegenerateChannelError& e) {
    std::cerr << "degenerate channel: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const NonCleanError& e) {
    std::cerr << "non-clean lattice: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const CapacityError& e) {
    std::cerr << "too large: " << e.what() << " (raise --cap)\n";
    return kExitInfeasible;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
