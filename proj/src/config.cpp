#include "qhedge/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "qhedge/errors.hpp"

namespace qhedge {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void fail(int line, const std::string& what) {
  std::ostringstream os;
  os << "config line " << line << ": " << what;
  throw ConfigError(os.str());
}

double parse_number(const std::string& value, int line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) fail(line, "trailing characters in number '" + value + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(line, "cannot parse number '" + value + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<double> parse_list(const std::string& value, int line) {
  std::vector<double> out;
  for (const auto& tok : split(value, ',')) out.push_back(parse_number(tok, line));
  return out;
}

std::vector<std::pair<double, double>> parse_knots(const std::string& value, int line) {
  std::vector<std::pair<double, double>> out;
  for (const auto& tok : split(value, ',')) {
    auto parts = split(tok, ':');
    if (parts.size() != 2) fail(line, "knot '" + tok + "' is not of the form t:value");
    out.emplace_back(parse_number(parts[0], line), parse_number(parts[1], line));
  }
  return out;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string section;
  std::string raw;
  int line = 0;
  bool driver_seen = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    std::size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = lower(trim(s.substr(1, s.size() - 2)));
      if (section != "model" && section != "payoff" && section != "experiment" &&
          section != "output")
        fail(line, "unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    std::string key = lower(trim(s.substr(0, eq)));
    std::string value = trim(s.substr(eq + 1));
    if (value.empty()) fail(line, "empty value for key '" + key + "'");
    if (section.empty()) fail(line, "key '" + key + "' outside any section");

    if (section == "model") {
      if (key == "driver") {
        cfg.driver_kind = lower(value);
        driver_seen = true;
      } else if (key == "alpha")
        cfg.alpha = parse_number(value, line);
      else if (key == "beta")
        cfg.beta = parse_number(value, line);
      else if (key == "delta")
        cfg.delta = parse_number(value, line);
      else if (key == "mu")
        cfg.mu = parse_number(value, line);
      else if (key == "intensity")
        cfg.intensity = parse_number(value, line);
      else if (key == "drift")
        cfg.drift = parse_number(value, line);
      else if (key == "sigma")
        cfg.sigma = parse_number(value, line);
      else if (key == "tail_scale")
        cfg.tail_scale = parse_number(value, line);
      else if (key == "loading")
        cfg.loading_kind = lower(value);
      else if (key == "loading_value")
        cfg.loading_value = parse_number(value, line);
      else if (key == "sigma_s")
        cfg.sigma_s = parse_number(value, line);
      else if (key == "mean_reversion")
        cfg.mean_reversion = parse_number(value, line);
      else if (key == "delivery")
        cfg.delivery = parse_number(value, line);
      else if (key == "loading_knots")
        cfg.loading_knots = parse_knots(value, line);
      else if (key == "sigma_long")
        cfg.sigma_long = parse_number(value, line);
      else if (key == "trend_knots")
        cfg.trend_knots = parse_knots(value, line);
      else if (key == "horizon")
        cfg.horizon = parse_number(value, line);
      else if (key == "s0")
        cfg.s0 = parse_number(value, line);
      else
        fail(line, "unknown model key '" + key + "'");
    } else if (section == "payoff") {
      if (key == "kind")
        cfg.payoff_kind = lower(value);
      else if (key == "strike")
        cfg.strike = parse_number(value, line);
      else if (key == "abscissa")
        cfg.abscissa = parse_number(value, line);
      else
        fail(line, "unknown payoff key '" + key + "'");
    } else if (section == "experiment") {
      if (key == "rebalances")
        cfg.rebalances = static_cast<int>(parse_number(value, line));
      else if (key == "refine")
        cfg.refine = static_cast<int>(parse_number(value, line));
      else if (key == "paths")
        cfg.paths = static_cast<long>(parse_number(value, line));
      else if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(parse_number(value, line));
      else if (key == "strikes")
        cfg.strikes = parse_list(value, line);
      else if (key == "tail_scales")
        cfg.tail_scales = parse_list(value, line);
      else if (key == "rebalance_counts") {
        for (double v : parse_list(value, line))
          cfg.rebalance_counts.push_back(static_cast<int>(v));
      } else if (key == "strategies") {
        cfg.strategy_vo = cfg.strategy_bs = false;
        for (const auto& tok : split(lower(value), ',')) {
          if (tok == "vo")
            cfg.strategy_vo = true;
          else if (tok == "bs")
            cfg.strategy_bs = true;
          else
            fail(line, "unknown strategy '" + tok + "'");
        }
      } else
        fail(line, "unknown experiment key '" + key + "'");
    } else if (section == "output") {
      if (key == "path")
        cfg.out_path = value;
      else if (key == "precision")
        cfg.precision = static_cast<int>(parse_number(value, line));
      else
        fail(line, "unknown output key '" + key + "'");
    }
  }
  if (!driver_seen) throw ConfigError("config is missing [model] driver");
  const std::string d = cfg.driver_kind;
  if (d != "nig" && d != "vg" && d != "poisson" && d != "brownian")
    throw ConfigError("unknown driver kind '" + d + "'");
  if (cfg.payoff_kind != "call" && cfg.payoff_kind != "put")
    throw ConfigError("unknown payoff kind '" + cfg.payoff_kind + "'");
  if (cfg.loading_kind != "constant" && cfg.loading_kind != "exp_decay" &&
      cfg.loading_kind != "piecewise")
    throw ConfigError("unknown loading kind '" + cfg.loading_kind + "'");
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

LevyLaw RunConfig::build_driver() const {
  try {
    LevyLaw law = [&] {
      if (driver_kind == "nig") return LevyLaw::nig(alpha, beta, delta, mu);
      if (driver_kind == "vg") return LevyLaw::vg(alpha, beta, delta, mu);
      if (driver_kind == "poisson") return LevyLaw::poisson(intensity);
      return LevyLaw::brownian(drift, sigma);
    }();
    if (tail_scale) law = rescale_tails(law, *tail_scale);
    return law;
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("driver parameters: ") + e.what());
  }
}

AdditiveModel RunConfig::build_model() const {
  try {
    LoadingFunction loading = [&] {
      if (loading_kind == "exp_decay")
        return LoadingFunction::exp_decay(sigma_s, mean_reversion,
                                          delivery > 0.0 ? delivery : horizon);
      if (loading_kind == "piecewise") return LoadingFunction::piecewise_constant(loading_knots);
      return LoadingFunction::constant(loading_value);
    }();
    return AdditiveModel(build_driver(), loading, sigma_long, TrendFunction(trend_knots), horizon,
                         s0);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("model parameters: ") + e.what());
  }
}

PayoffKind RunConfig::payoff() const {
  return payoff_kind == "put" ? PayoffKind::Put : PayoffKind::Call;
}

ContourMeasure RunConfig::build_measure(const AdditiveModel& model, double strike_override) const {
  double k = strike_override > 0.0 ? strike_override : strike;
  double r = abscissa ? *abscissa : choose_abscissa(payoff(), model);
  try {
    return payoff() == PayoffKind::Call ? ContourMeasure::call(k, r) : ContourMeasure::put(k, r);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("payoff parameters: ") + e.what());
  }
}

}  // namespace qhedge
