// Command-line front end: validate | price | error | simulate |
// kurtosis-table, all driven by a declarative config file.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "qhedge/config.hpp"
#include "qhedge/error_variance.hpp"
#include "qhedge/errors.hpp"
#include "qhedge/sim.hpp"

namespace {

using namespace qhedge;

constexpr const char* kCsvHeader = "# qhedge csv v1";

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::string dump_tables_path;
  double tol = 1e-8;
  int threads = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

std::unique_ptr<std::ostream> open_output(const RunConfig& cfg, const CommonArgs& args,
                                          std::ostream*& out) {
  std::string path = !args.out_path.empty() ? args.out_path : cfg.out_path;
  if (path.empty()) {
    out = &std::cout;
    return nullptr;
  }
  auto file = std::make_unique<std::ofstream>(path);
  if (!*file) throw ConfigError("cannot open output file '" + path + "'");
  out = file.get();
  return file;
}

std::vector<double> strikes_or_default(const RunConfig& cfg) {
  return cfg.strikes.empty() ? std::vector<double>{cfg.strike} : cfg.strikes;
}

int cmd_validate(const RunConfig& cfg) {
  AdditiveModel model = cfg.build_model();
  ValidationReport report = validate(model);
  bool payoff_ok = true;
  std::string payoff_detail;
  try {
    ContourMeasure measure = cfg.build_measure(model);
    ensure_admissible(measure, model);
    payoff_detail = "contour abscissa admissible";
  } catch (const ModelError& e) {
    payoff_ok = false;
    payoff_detail = e.what();
  }
  for (const auto& item : report.items)
    std::cout << (item.passed ? "PASS" : "FAIL") << (item.required ? "  " : "* ") << item.name
              << ": " << item.detail << "\n";
  std::cout << (payoff_ok ? "PASS" : "FAIL") << "  payoff-admissible: " << payoff_detail << "\n";
  std::cout << "(* informational only)\n";
  bool ok = report.ok() && payoff_ok;
  std::cout << (ok ? "all assumptions hold" : "assumption failure") << "\n";
  return ok ? 0 : 3;
}

int cmd_price(const RunConfig& cfg, const CommonArgs& args) {
  AdditiveModel model = cfg.build_model();
  std::vector<SweepRow> rows =
      strike_sweep(model, cfg.payoff(), strikes_or_default(cfg), cfg.rebalances, cfg.refine,
                   args.tol);
  std::ostream* out = nullptr;
  auto holder = open_output(cfg, args, out);
  *out << kCsvHeader << "\n";
  *out << "strike,v0_vo,v0_bs,hedge0_vo,delta0_bs\n";
  *out << std::setprecision(cfg.precision);
  for (const auto& r : rows)
    *out << r.strike << ',' << r.v0_vo << ',' << r.v0_bs << ',' << r.hedge0_vo << ','
         << r.delta0_bs << "\n";

  if (!args.dump_tables_path.empty()) {
    ContourMeasure measure = cfg.build_measure(model);
    TimeGrid grid(model.horizon(), cfg.rebalances, cfg.refine);
    ContourQuadrature quadrature =
        discretize(measure, quadrature_options_for(model, measure, grid, args.tol));
    FsTables tables = build_tables(model, quadrature, grid);
    std::ofstream dump(args.dump_tables_path);
    if (!dump) throw ConfigError("cannot open '" + args.dump_tables_path + "'");
    tables.write_csv(dump);
  }
  return 0;
}

int cmd_error(const RunConfig& cfg, const CommonArgs& args) {
  AdditiveModel model = cfg.build_model();
  std::ostream* out = nullptr;
  auto holder = open_output(cfg, args, out);
  *out << kCsvHeader << "\n";
  *out << "strike,j0,sqrt_j0\n";
  *out << std::setprecision(cfg.precision);
  TimeGrid grid(model.horizon(), cfg.rebalances, cfg.refine);
  for (double strike : strikes_or_default(cfg)) {
    ContourMeasure measure = cfg.build_measure(model, strike);
    QuadratureOptions opts =
        error_quadrature_options_for(model, measure, std::max(args.tol, 1e-8));
    ContourQuadrature quadrature = discretize(measure, opts);
    FsTables tables = build_tables(model, quadrature, grid);
    double j0 = hedging_error_variance(model, measure, tables, args.threads);
    *out << strike << ',' << j0 << ',' << std::sqrt(j0) << "\n";
  }
  return 0;
}

int cmd_simulate(const RunConfig& cfg, const CommonArgs& args) {
  AdditiveModel model = cfg.build_model();
  std::vector<int> counts =
      cfg.rebalance_counts.empty() ? std::vector<int>{cfg.rebalances} : cfg.rebalance_counts;
  std::ostream* out = nullptr;
  auto holder = open_output(cfg, args, out);
  *out << kCsvHeader << "\n";
  *out << "strategy,rebalances,strike,paths,seed,v0,bias,std,stderr\n";
  *out << std::setprecision(cfg.precision);
  for (int n : counts) {
    HedgeExperiment exp{model, cfg.build_measure(model)};
    exp.rebalances = n;
    exp.refine = cfg.refine;
    exp.paths = cfg.paths;
    exp.base_seed = args.seed_set ? args.seed : cfg.seed;
    exp.run_vo = cfg.strategy_vo;
    exp.run_bs = cfg.strategy_bs;
    exp.threads = args.threads;
    exp.quad_tol = args.tol;
    HedgeResult result = run_experiment(exp);
    if (result.has_vo)
      *out << "vo," << n << ',' << cfg.strike << ',' << cfg.paths << ',' << exp.base_seed << ','
           << result.vo.initial_capital << ',' << result.vo.bias << ',' << result.vo.stddev << ','
           << result.vo.std_error << "\n";
    if (result.has_bs)
      *out << "bs," << n << ',' << cfg.strike << ',' << cfg.paths << ',' << exp.base_seed << ','
           << result.bs.initial_capital << ',' << result.bs.bias << ',' << result.bs.stddev << ','
           << result.bs.std_error << "\n";
  }
  return 0;
}

int cmd_kurtosis_table(const RunConfig& cfg, const CommonArgs& args) {
  LevyLaw base = [&] {
    RunConfig plain = cfg;
    plain.tail_scale.reset();
    return plain.build_driver();
  }();
  std::vector<double> scales =
      cfg.tail_scales.empty() ? std::vector<double>{1.0} : cfg.tail_scales;
  std::ostream* out = nullptr;
  auto holder = open_output(cfg, args, out);
  *out << kCsvHeader << "\n";
  *out << "tail_scale,alpha,excess_kurtosis\n";
  *out << std::setprecision(cfg.precision);
  for (double c : scales) {
    LevyLaw scaled = rescale_tails(base, c);
    *out << c << ',' << scaled.nig_params().alpha << ',' << moments(scaled).excess_kurtosis
         << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variance-optimal hedging engine for exponential additive models"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "configuration file")->required();
    cmd->add_option("--out", args.out_path, "output CSV path (default: stdout)");
    cmd->add_option("--tol", args.tol, "contour quadrature tolerance");
    cmd->add_option("--threads", args.threads, "worker threads");
    cmd->add_option("--seed", args.seed, "seed override")->each([&](const std::string&) {
      args.seed_set = true;
    });
    return cmd;
  };

  CLI::App* validate_cmd = add_common(app.add_subcommand("validate", "check model assumptions"));
  CLI::App* price_cmd =
      add_common(app.add_subcommand("price", "initial capital and hedge ratios"));
  price_cmd->add_option("--dump-tables", args.dump_tables_path, "write the node tables as CSV");
  CLI::App* error_cmd =
      add_common(app.add_subcommand("error", "closed-form hedging error variance"));
  CLI::App* simulate_cmd =
      add_common(app.add_subcommand("simulate", "Monte Carlo hedging backtest"));
  CLI::App* kurtosis_cmd =
      add_common(app.add_subcommand("kurtosis-table", "tail-rescaled excess kurtosis"));

  CLI11_PARSE(app, argc, argv);

  try {
    qhedge::RunConfig cfg = qhedge::parse_config_file(args.config_path);
    if (validate_cmd->parsed()) return cmd_validate(cfg);
    if (price_cmd->parsed()) return cmd_price(cfg, args);
    if (error_cmd->parsed()) return cmd_error(cfg, args);
    if (simulate_cmd->parsed()) return cmd_simulate(cfg, args);
    if (kurtosis_cmd->parsed()) return cmd_kurtosis_table(cfg, args);
  } catch (const qhedge::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qhedge::QuadratureError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const qhedge::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const qhedge::Error& e) {
    std::cerr << "assumption failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
