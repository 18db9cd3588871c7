#include "rabi/experiments.hpp"

#include "rabi/diagnostics.hpp"
#include "rabi/numerics.hpp"
#include "rabi/parallel.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace rabi {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string kelvin_label(double t) {
  std::ostringstream os;
  os << "delta_" << format_number(t) << "K_persec";
  return os.str();
}

NoiseModel noise_from(const ExperimentConfig& cfg) { return NoiseModel{cfg.gamma, cfg.sigma_res}; }

double relative_single_shot(const SpinMoments& m, const InterferometerParams& p, double phase) {
  const double d2 = single_time_sensitivity(m, p, phase / p.omega(), 1);
  return std::sqrt(d2) / p.delta_rate();
}

}  // namespace

DickeState make_input_state(const ExperimentConfig& cfg) {
  switch (cfg.state) {
    case InputState::Css:
      return make_css(cfg.particles);
    case InputState::Gaussian:
      return make_gaussian_squeezed(
          cfg.particles, cfg.sigma > 0.0 ? cfg.sigma : 0.5 * std::sqrt(double(cfg.particles)));
    case InputState::TwinFock:
      return make_twin_fock(cfg.particles);
  }
  throw ConfigError("config key 'state': unsupported value");
}

double squeezing_or_nan(const SpinMoments& m) {
  try {
    return squeezing_parameter(m);
  } catch (const std::domain_error&) {
    return kNaN;
  }
}

SearchInterval search_interval(const ExperimentConfig& cfg, double delta_rate) {
  SearchInterval iv{cfg.interval_lo > 0.0 ? cfg.interval_lo : 0.5 * delta_rate,
                    cfg.interval_hi > 0.0 ? cfg.interval_hi : 1.5 * delta_rate};
  if (!(iv.hi > iv.lo)) throw ConfigError("config key 'interval_hi': must exceed interval_lo");
  return iv;
}

ResolvedSurface resolve_surface(const ExperimentConfig& cfg) {
  ResolvedSurface out;
  auto& s = out.setup;
  s.d = cfg.calibration_distance;
  s.l = cfg.well_separation;
  s.epsilon0 = cfg.epsilon0;
  s.alpha0 = cfg.alpha0;
  if (cfg.mode_model == "gaussian") {
    s = s.with_gaussian_width(cfg.mode_width);
  } else if (cfg.mode_model == "calibrated") {
    out.calibration = casimir::calibrate_mode_width(s, cfg.calibration_target);
    if (out.calibration->width > 0.0) s = s.with_gaussian_width(out.calibration->width);
    if (!out.calibration->reached) warn(out.calibration->note);
  }
  s.validate();
  return out;
}

// ---------------------------------------------------------------- fig1

Fig1Result run_fig1(const ExperimentConfig& cfg) {
  cfg.validate();
  Fig1Result result;
  result.temperatures = cfg.temperatures;
  result.surface = resolve_surface(cfg);

  const auto curve = casimir::detuning_curve(cfg.d_grid, result.surface.setup, cfg.temperatures);
  const SpinMoments mom = moments(make_input_state(cfg));
  const NoiseModel noise = noise_from(cfg);

  result.rows.resize(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    Fig1Row& row = result.rows[i];
    row.d = curve[i].d;
    row.delta_zero_t = curve[i].delta_zero_t;
    row.delta_thermal = curve[i].delta_thermal;
  }
  // Per-row error bars are independent; MC trials parallelize internally.
  const int row_threads = cfg.mc ? 1 : cfg.threads;
  parallel_for(result.rows.size(), row_threads, [&](std::size_t i) {
    Fig1Row& row = result.rows[i];
    const InterferometerParams p(cfg.ej_rate, row.delta_zero_t);
    const auto schedule = uniform_schedule(p, cfg.k, cfg.m);
    row.err = schedule_sensitivity(mom, p, schedule, noise);
    row.significance =
        row.delta_thermal.empty() ? kNaN : std::abs(row.delta_thermal[0] - row.delta_zero_t) / row.err;
  });
  if (cfg.mc) {
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      Fig1Row& row = result.rows[i];
      const InterferometerParams p(cfg.ej_rate, row.delta_zero_t);
      MonteCarloOptions mc;
      mc.trials = cfg.trials;
      mc.seed = cfg.seed + i;
      mc.threads = cfg.threads;
      const auto summary = monte_carlo_fit(mom, p, uniform_schedule(p, cfg.k, cfg.m), noise,
                                           search_interval(cfg, row.delta_zero_t), mc);
      row.mc_rmse = summary.rmse;
    }
  }
  return result;
}

void write_fig1_csv(std::ostream& os, const Fig1Result& result) {
  const bool mc = !result.rows.empty() && result.rows.front().mc_rmse.has_value();
  os << "d_m,delta_0K_persec";
  for (double t : result.temperatures) os << ',' << kelvin_label(t);
  os << ",err_persec,significance";
  if (mc) os << ",mc_rmse_persec";
  os << '\n';
  for (const auto& row : result.rows) {
    os << format_number(row.d) << ',' << format_number(row.delta_zero_t);
    for (double v : row.delta_thermal) os << ',' << format_number(v);
    os << ',' << format_number(row.err) << ',' << format_number(row.significance);
    if (mc) os << ',' << format_number(row.mc_rmse.value_or(kNaN));
    os << '\n';
  }
}

// --------------------------------------------------------------- fig2a

Fig2aResult run_fig2a(const ExperimentConfig& cfg) {
  cfg.validate();
  const InterferometerParams p(cfg.ej_rate, cfg.delta_rate);
  const int points = cfg.omega_points;
  const auto& curves = cfg.xi2_curves;

  std::vector<std::vector<Fig2aPoint>> per_curve(curves.size());
  std::vector<Fig2aMinimum> minima(curves.size());
  parallel_for(curves.size(), cfg.threads, [&](std::size_t c) {
    const double xi2 = curves[c];
    const SpinMoments mom = moments(make_state_with_squeezing(cfg.particles, xi2));
    auto& pts = per_curve[c];
    pts.resize(points + 1);
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= points; ++j) {
      const double phase = 2.0 * std::numbers::pi * j / points;
      const double rel = relative_single_shot(mom, p, phase);
      pts[j] = {xi2, phase, rel, !std::isfinite(rel)};
      if (std::isfinite(rel) && rel < best_value) {
        best_value = rel;
        best = static_cast<std::size_t>(j);
      }
    }
    if (!std::isfinite(best_value))
      throw NumericalError("fig2a: sensitivity diverges on the whole grid for xi2 = " +
                           format_number(xi2));
    const double step = 2.0 * std::numbers::pi / points;
    const double lo = std::max(pts[best].phase - step, 0.5 * step);
    const double hi = std::min(pts[best].phase + step, 2.0 * std::numbers::pi - 0.5 * step);
    const auto refined =
        numerics::minimize_bounded([&](double w) { return relative_single_shot(mom, p, w); }, lo, hi);
    minima[c] = {xi2, refined.x, refined.fx, relative_single_shot(mom, p, std::numbers::pi)};
  });

  Fig2aResult result;
  for (auto& pts : per_curve) result.points.insert(result.points.end(), pts.begin(), pts.end());
  result.minima = std::move(minima);
  return result;
}

void write_fig2a_csv(std::ostream& os, const Fig2aResult& result) {
  os << "xi2,Omega,rel_sensitivity,status\n";
  for (const auto& pt : result.points) {
    os << format_number(pt.xi2) << ',' << format_number(pt.phase) << ',';
    if (pt.divergent) os << ",divergent\n";
    else os << format_number(pt.rel_sensitivity) << ",ok\n";
  }
}

// --------------------------------------------------------------- fig2b

std::vector<Fig2bRow> run_fig2b(const ExperimentConfig& cfg) {
  cfg.validate();
  const InterferometerParams p(cfg.ej_rate, cfg.delta_rate);
  const auto optimal = optimal_point_schedule(p, cfg.optimal_shots);
  const auto uniform = uniform_schedule(p, cfg.k, cfg.m);
  std::vector<Fig2bRow> rows(cfg.xi2_grid.size());
  parallel_for(rows.size(), cfg.threads, [&](std::size_t i) {
    const double xi2 = cfg.xi2_grid[i];
    const SpinMoments mom = moments(make_state_with_squeezing(cfg.particles, xi2));
    Fig2bRow& r = rows[i];
    r.xi2 = xi2;
    r.optimal = schedule_sensitivity(mom, p, optimal) / p.delta_rate();
    r.uniform = schedule_sensitivity(mom, p, uniform) / p.delta_rate();
    r.ratio = r.uniform / r.optimal;
    r.formula = squeezing_limited_relative_sensitivity(xi2, cfg.particles, p, cfg.optimal_shots);
  });
  return rows;
}

void write_fig2b_csv(std::ostream& os, const std::vector<Fig2bRow>& rows) {
  os << "xi2,optimal_rel,uniform_rel,ratio,formula_rel\n";
  for (const auto& r : rows)
    os << format_number(r.xi2) << ',' << format_number(r.optimal) << ','
       << format_number(r.uniform) << ',' << format_number(r.ratio) << ','
       << format_number(r.formula) << '\n';
}

// ------------------------------------------------------------- scaling

ScalingResult run_scaling(const ExperimentConfig& cfg) {
  cfg.validate();
  const InterferometerParams p(cfg.ej_rate, cfg.delta_rate);
  const auto schedule = optimal_point_schedule(p, cfg.optimal_shots);
  ScalingResult result;
  result.rows.resize(cfg.n_list.size());
  parallel_for(result.rows.size(), cfg.threads, [&](std::size_t i) {
    const int n = cfg.n_list[i];
    ScalingRow& row = result.rows[i];
    row.particles = n;
    row.css_err = schedule_sensitivity(moments(make_css(n)), p, schedule);
    const SpinMoments fam = moments(make_gaussian_squeezed(n, cfg.fock_sigma));
    row.family_err = schedule_sensitivity(fam, p, schedule);
    row.family_xi2 = squeezing_parameter(fam);
    row.family_formula =
        squeezing_limited_relative_sensitivity(row.family_xi2, n, p, cfg.optimal_shots) *
        p.delta_rate();
  });
  std::vector<std::pair<int, double>> css, fam, formula;
  for (const auto& r : result.rows) {
    css.emplace_back(r.particles, r.css_err);
    fam.emplace_back(r.particles, r.family_err);
    formula.emplace_back(r.particles, r.family_formula);
  }
  result.beta_css = scaling_exponent(css);
  result.beta_family = scaling_exponent(fam);
  result.beta_family_formula = scaling_exponent(formula);
  return result;
}

void write_scaling_csv(std::ostream& os, const ScalingResult& result) {
  os << "N,css_err_persec,family_err_persec,family_xi2,family_formula_err_persec\n";
  for (const auto& r : result.rows)
    os << r.particles << ',' << format_number(r.css_err) << ',' << format_number(r.family_err)
       << ',' << format_number(r.family_xi2) << ',' << format_number(r.family_formula) << '\n';
}

// ----------------------------------------------------------- crossover

double crossover_time(const InterferometerParams& p) {
  const double s = p.sin_alpha();
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  return p.cos_alpha() / (s * s * p.omega());
}

double run_crossover(const ExperimentConfig& cfg) {
  cfg.validate();
  return crossover_time(InterferometerParams(cfg.ej_rate, cfg.delta_rate));
}

// ------------------------------------------------------ single-purpose

std::vector<casimir::DetuningRow> run_detuning(const ExperimentConfig& cfg) {
  cfg.validate();
  return casimir::detuning_curve(cfg.d_grid, resolve_surface(cfg).setup, cfg.temperatures);
}

void write_detuning_csv(std::ostream& os, const std::vector<double>& temperatures,
                        const std::vector<casimir::DetuningRow>& rows) {
  os << "d_m,delta_0K_persec";
  for (double t : temperatures) os << ',' << kelvin_label(t);
  os << '\n';
  for (const auto& r : rows) {
    os << format_number(r.d) << ',' << format_number(r.delta_zero_t);
    for (double v : r.delta_thermal) os << ',' << format_number(v);
    os << '\n';
  }
}

SensitivityResult run_sensitivity(const ExperimentConfig& cfg) {
  cfg.validate();
  const InterferometerParams p(cfg.ej_rate, cfg.delta_rate);
  const auto schedule = uniform_schedule(p, cfg.k, cfg.m);
  const SpinMoments mom = moments(make_input_state(cfg));
  const auto profile = sensitivity_profile(mom, p, schedule, noise_from(cfg));
  SensitivityResult result;
  for (int i = 0; i < schedule.size(); ++i) result.rows.push_back({schedule.times[i], profile[i]});
  result.aggregate = aggregate_sensitivity(profile);
  return result;
}

void write_sensitivity_csv(std::ostream& os, const SensitivityResult& result, double delta_rate) {
  os << "t_s,delta2_persec2,rel_sensitivity\n";
  for (const auto& r : result.rows)
    os << format_number(r.t) << ',' << format_number(r.delta2) << ','
       << format_number(std::sqrt(r.delta2) / delta_rate) << '\n';
}

MeasurementRecord run_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  const InterferometerParams p(cfg.ej_rate, cfg.delta_rate);
  return simulate_record(moments(make_input_state(cfg)), p, uniform_schedule(p, cfg.k, cfg.m),
                         noise_from(cfg), cfg.seed);
}

void write_record_csv(std::ostream& os, const MeasurementRecord& record) {
  os << "t_s,n_mean\n";
  for (std::size_t i = 0; i < record.times.size(); ++i)
    os << format_number(record.times[i]) << ',' << format_number(record.n_mean[i]) << '\n';
}

MeasurementRecord read_record_csv(std::istream& is, const std::string& source) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(source + ": empty record file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_s,n_mean") throw ConfigError(source + ":1: expected header 't_s,n_mean'");
  MeasurementRecord record;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      std::size_t used_t = 0, used_n = 0;
      const std::string ts = line.substr(0, comma), ns = line.substr(comma + 1);
      const double t = std::stod(ts, &used_t);
      const double n = std::stod(ns, &used_n);
      if (used_t != ts.size() || used_n != ns.size()) throw std::invalid_argument("trailing text");
      record.times.push_back(t);
      record.n_mean.push_back(n);
    } catch (const std::exception&) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 't_s,n_mean' numbers");
    }
  }
  if (record.times.empty()) throw ConfigError(source + ": record has no rows");
  return record;
}

EstimationResult run_fit(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.record_path.empty()) throw ConfigError("config key 'record': required by fit");
  std::ifstream in(cfg.record_path);
  if (!in) throw ConfigError("config key 'record': cannot open '" + cfg.record_path + "'");
  const MeasurementRecord record = read_record_csv(in, cfg.record_path);
  MeasurementSchedule schedule{record.times, cfg.m};
  try {
    schedule.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key 'record': " + std::string(e.what()));
  }
  return fit_ml(record, moments(make_input_state(cfg)), cfg.ej_rate, schedule, noise_from(cfg),
                search_interval(cfg, cfg.delta_rate));
}

void write_fit_csv(std::ostream& os, const EstimationResult& result, const ExperimentConfig& cfg) {
  const double xi2 = squeezing_or_nan(moments(make_input_state(cfg)));
  os << "delta_est_persec,delta_err_persec,k,m,xi2,sigma_res,gamma,seed\n";
  os << format_number(result.delta_est) << ',' << format_number(result.delta_err) << ','
     << result.per_time_sensitivity.size() << ',' << cfg.m << ',' << format_number(xi2) << ','
     << format_number(cfg.sigma_res) << ',' << format_number(cfg.gamma) << ',' << cfg.seed << '\n';
}

}  // namespace rabi
