#ifndef QHEDGE_CONFIG_HPP_
#define QHEDGE_CONFIG_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qhedge/contour.hpp"
#include "qhedge/sim.hpp"

namespace qhedge {

// Declarative run configuration, sections [model], [payoff],
// [experiment], [output].  Keys are lower-case; '#' starts a comment;
// numbers accept scientific notation; lists are comma separated; knot
// lists use "t:value" pairs.
struct RunConfig {
  // model
  std::string driver_kind;  // nig | vg | poisson | brownian
  double alpha = 0, beta = 0, delta = 0, mu = 0;
  double intensity = 0;
  double drift = 0, sigma = 0;
  std::optional<double> tail_scale;  // NIG rescale coefficient
  std::string loading_kind = "constant";
  double loading_value = 1.0;
  double sigma_s = 0, mean_reversion = 0, delivery = 0;
  std::vector<std::pair<double, double>> loading_knots;
  double sigma_long = 0.0;
  std::vector<std::pair<double, double>> trend_knots;
  double horizon = 0.25;
  double s0 = 100.0;

  // payoff
  std::string payoff_kind = "call";
  double strike = 100.0;
  std::optional<double> abscissa;

  // experiment
  int rebalances = 12;
  int refine = 16;
  long paths = 5000;
  std::uint64_t seed = 42;
  std::vector<double> strikes;
  std::vector<double> tail_scales;
  std::vector<int> rebalance_counts;
  bool strategy_vo = true;
  bool strategy_bs = true;

  // output
  std::string out_path;
  int precision = 10;

  LevyLaw build_driver() const;
  AdditiveModel build_model() const;
  PayoffKind payoff() const;
  // Uses the configured abscissa when present, otherwise picks one.
  ContourMeasure build_measure(const AdditiveModel& model, double strike_override = 0.0) const;
};

// Parses the configuration text; throws ConfigError with a line/field
// diagnostic on any problem.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

}  // namespace qhedge

#endif  // QHEDGE_CONFIG_HPP_
