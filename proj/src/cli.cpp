#include "ptfoucault/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <functional>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ptfoucault/core_model.hpp"
#include "ptfoucault/fock_oracle.hpp"
#include "ptfoucault/foucault_map.hpp"
#include "ptfoucault/report_io.hpp"
#include "ptfoucault/trajectory.hpp"
#include "ptfoucault/wei_norman.hpp"

namespace ptfoucault::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Validation failures that map to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FigureSet {
  const char* name;
  double n0;
  double F0;
  double omega;
};

constexpr FigureSet kFigureSets[] = {
    {"fig1a", 8.0, 8.0, -2.0},   {"fig1b", 10.0, 6.0, -2.0},   {"fig1c", 5.0, 5.0, 2.0},
    {"fig1d", 7.0, 4.5, 3.0},    {"fig1e", 0.0, 15.0, 2.0},    {"fig1f", 0.0, -3.0, 2.0 / 3.0},
    {"fig2a", 10.0, 8.0, -2.0},  {"fig2b", 10.0, 9.5, -2.0},   {"fig2c", 10.0, 10.0, -2.0},
    {"fig2d", 10.0, 10.5, -2.0}, {"fig2e", 10.0, 12.0, -2.0},
};

DriveSpec drive_of(const RunConfig& cfg) {
  DriveSpec d;
  d.F0 = cfg.F0;
  d.omega = cfg.omega;
  d.sign = cfg.sign;
  d.family = drive_family_from_string(cfg.family);
  return d;
}

SimulationGrid grid_of(const RunConfig& cfg) {
  SimulationGrid g;
  g.t_start = cfg.t_start;
  g.t_end = cfg.t_max;
  g.dt = cfg.dt;
  return g;
}

void require_valid(const RunConfig& cfg) {
  const ValidationReport rep = validate(drive_of(cfg), {cfg.n0}, grid_of(cfg));
  if (!rep.ok()) {
    std::string msg;
    for (const auto& d : rep.diagnostics) {
      if (d.fatal) msg += to_string(d.code) + ": " + d.message + "\n";
    }
    throw UsageError(msg);
  }
}

double omega_eff_of(const RunConfig& cfg) {
  const DriveSpec d = drive_of(cfg);
  d.check();
  if (d.family != DriveFamily::PtComplex) {
    throw UsageError("this subcommand needs the PT drive family (--family pt)");
  }
  return effective_omega(d);
}

void require_regular(double w, const RunConfig& cfg) {
  if (is_secular(w) && !cfg.secular_limit) {
    throw UsageError(
        "SECULAR_SINGULAR: omega_eff = -1 makes the closed form singular; rerun with "
        "--secular-limit to use the limit formula");
  }
}

fs::path resolve_output(const std::string& out) {
  const char* env = std::getenv(kOutDirEnv);
  fs::path p(out);
  if (env != nullptr && *env != '\0') return fs::path(env) / p.filename();
  return p;
}

void emit(const RunConfig& cfg, const std::string& content, std::ostream& out) {
  if (cfg.out.empty()) {
    out << content;
    return;
  }
  try {
    io::write_file_atomic(resolve_output(cfg.out), content);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
}

std::string table(const RunConfig& cfg, const std::vector<std::string>& header,
                  const std::vector<std::vector<double>>& rows) {
  if (cfg.format == "json") {
    json j;
    for (std::size_t c = 0; c < header.size(); ++c) {
      json col = json::array();
      for (const auto& row : rows) col.push_back(row[c]);
      j[header[c]] = std::move(col);
    }
    return j.dump(2) + "\n";
  }
  std::ostringstream s;
  io::write_csv(s, header, rows);
  return s.str();
}

json params_json(double n0, double F0, double omega) {
  return json{{"n0", n0}, {"F0", F0}, {"omega", omega}};
}

json duality_json(const DualityReport& rep) {
  return json{{"params", params_json(rep.params.n0, rep.params.F0, rep.params.omega)},
              {"hypotrochoid",
               {{"R", rep.hypotrochoid.R}, {"r", rep.hypotrochoid.r}, {"d", rep.hypotrochoid.d}}},
              {"fit",
               {{"scale", rep.fit.scale},
                {"rotation", rep.fit.rotation},
                {"reflection", rep.fit.reflection},
                {"parameter_shift", rep.fit.parameter_shift},
                {"residual", rep.fit.residual}}},
              {"expected_scale", rep.expected_scale},
              {"scale_matches", rep.scale_matches},
              {"tolerance", rep.tolerance},
              {"pass", rep.pass}};
}

json family_json(const CurveFamily& fam) {
  json j{{"family", to_string(fam.kind)}};
  if (fam.kind == CurveKind::Circle) {
    j["radius"] = fam.radius;
    j["frequency"] = fam.frequency;
  }
  if (fam.kind == CurveKind::Ellipse || fam.kind == CurveKind::FixedPositionOscillatingMomentum) {
    j["semi_axis_x"] = fam.semi_axis_x;
    j["semi_axis_p"] = fam.semi_axis_p;
  }
  if (fam.lobes != 0) j["lobes"] = fam.lobes;
  if (fam.ratio) j["omega_ratio"] = std::to_string(fam.ratio->num) + "/" + std::to_string(fam.ratio->den);
  return j;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_trajectory(const RunConfig& cfg, std::ostream& out) {
  require_valid(cfg);
  const DriveSpec drive = drive_of(cfg);
  const double w = omega_eff_of(cfg);
  require_regular(w, cfg);
  const std::vector<double> times = grid_of(cfg).times();
  const Trajectory traj = sample_trajectory(drive, {cfg.n0}, times, {cfg.secular_limit});
  std::vector<std::vector<double>> rows;
  rows.reserve(traj.points.size());
  for (const auto& p : traj.points) {
    rows.push_back({p.t, p.x_mean, p.p_mean, p.var_x, p.var_p, p.radius, p.theta});
  }
  emit(cfg, table(cfg, {"t", "x_mean", "p_mean", "var_x", "var_p", "radius", "theta"}, rows), out);
  return kOk;
}

int cmd_wn(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_valid(cfg);
  if (cfg.t_start != 0.0) throw UsageError("wn integrates from t = 0; --t-start must be 0");
  const DriveSpec drive = drive_of(cfg);
  const std::vector<double> times = grid_of(cfg).times();
  const DriveFunction fn = DriveFunction::from_spec(drive);
  const bool closed = drive.family == DriveFamily::PtComplex && !cfg.numeric;
  const auto coeffs = closed ? wn_series_pt(drive, times) : wn_series(fn, times);
  const ResidualReport res = wn_residual(coeffs, fn);
  err << "wn residuals: f0=" << io::format_number(res.f0) << " f1=" << io::format_number(res.f1)
      << " f2=" << io::format_number(res.f2) << " f3=" << io::format_number(res.f3) << '\n';

  std::vector<std::vector<double>> rows;
  rows.reserve(coeffs.size());
  for (const auto& c : coeffs) {
    rows.push_back({c.t, c.f0.real(), c.f0.imag(), c.f1.real(), c.f1.imag(), c.f2.real(),
                    c.f2.imag(), c.f3.real(), c.f3.imag()});
  }
  emit(cfg,
       table(cfg, {"t", "re_f0", "im_f0", "re_f1", "im_f1", "re_f2", "im_f2", "re_f3", "im_f3"},
             rows),
       out);
  return kOk;
}

int cmd_circular(const RunConfig& cfg, std::ostream& out) {
  const double w = omega_eff_of(cfg);
  if (is_secular(w)) throw UsageError("SECULAR_SINGULAR: no circular drive strength at omega_eff = -1");
  const double F0 = circular_drive_strength(cfg.n0, w);
  const CircularityResult c = is_circular(cfg.n0, F0, w, cfg.tol);
  const json j{{"n0", cfg.n0},
               {"omega_eff", w},
               {"F0", F0},
               {"circular", c.circular},
               {"radius", c.radius},
               {"frequency", c.frequency},
               {"max_radius_deviation", c.max_radius_deviation}};
  emit(cfg, j.dump(2) + "\n", out);
  return kOk;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  const double w = omega_eff_of(cfg);
  const CurveFamily fam = classify(cfg.n0, cfg.F0, w, cfg.tol);
  json j = params_json(cfg.n0, cfg.F0, w);
  j.update(family_json(fam));
  if (!is_secular(w)) {
    const LobeAmplitudes c = lobe_amplitudes(cfg.n0, cfg.F0, w);
    j["c1"] = c.c1;
    j["c2"] = c.c2;
  }
  emit(cfg, j.dump(2) + "\n", out);
  return kOk;
}

int cmd_map(const RunConfig& cfg, std::ostream& out) {
  if (cfg.omega == 0.0) throw UsageError("map: omega = 0 has no hypotrochoid");
  const double w = omega_eff_of(cfg);
  const HypotrochoidParams h = to_hypotrochoid(cfg.n0, cfg.F0, w);
  const json j{{"params", params_json(cfg.n0, cfg.F0, w)},
               {"hypotrochoid", {{"R", h.R}, {"r", h.r}, {"d", h.d}}},
               {"degenerate", h.degenerate()}};
  emit(cfg, j.dump(2) + "\n", out);
  return kOk;
}

int cmd_inverse_map(const RunConfig& cfg, std::ostream& out) {
  const InverseMapResult res = from_hypotrochoid({cfg.R, cfg.r, cfg.d});
  json sols = json::array();
  for (const auto& s : res.solutions) sols.push_back(params_json(s.n0, s.F0, s.omega));
  const json j{{"hypotrochoid", {{"R", cfg.R}, {"r", cfg.r}, {"d", cfg.d}}},
               {"mappable", res.mappable},
               {"solutions", sols},
               {"reason", res.reason},
               {"candidate_family", res.candidate_family}};
  emit(cfg, j.dump(2) + "\n", out);
  return kOk;
}

int cmd_verify_duality(const RunConfig& cfg, std::ostream& out) {
  const double w = omega_eff_of(cfg);
  if (w == 0.0 || is_secular(w)) throw UsageError("verify-duality needs omega_eff not in {0, -1}");
  CurveOptions opts;
  opts.samples = cfg.samples;
  const DualityReport rep = verify_duality(cfg.n0, cfg.F0, w, 1e-6, opts);
  emit(cfg, duality_json(rep).dump(2) + "\n", out);
  return rep.pass ? kOk : kVerificationFail;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_valid(cfg);
  const DriveSpec drive = drive_of(cfg);
  const FockVector psi0 = coherent_state({cfg.n0, 0.0}, cfg.N);
  if (!psi0.truncation_safe()) {
    err << "warning: initial coherent state is truncation-unsafe (tail mass "
        << io::format_number(psi0.tail_mass()) << ") at N = " << cfg.N << '\n';
  }
  EvolveOptions opts;
  opts.method = integrator_from_string(cfg.method);
    opts.precision = precision_from_string(cfg.precision);
  ObservableOptions obs;
  obs.theta0 = cfg.theta0;
  const int stride = std::max(1, cfg.record_every);
  const std::int64_t last = grid_of(cfg).step_count();
  std::int64_t index = 0;
  std::vector<std::vector<double>> rows;
  try {
    evolve_observe(psi0, drive, grid_of(cfg), opts, [&](double t, const FockVector& psi) {
      if (index % stride == 0 || index == last) {
        const ObservableRecord r = observables(psi, t, obs);
        rows.push_back({r.t, r.x_mean, r.p_mean, r.var_x, r.var_p, r.n_mean, r.norm, r.theta_pb,
                        r.tail_mass});
      }
      ++index;
    });
  } catch (const NormOverflowError& e) {
    throw UsageError(e.what());
  }
  emit(cfg,
       table(cfg,
             {"t", "x_mean", "p_mean", "var_x", "var_p", "n_mean", "norm", "theta_pb", "tail_mass"},
             rows),
       out);
  return kOk;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  require_valid(cfg);
  const DriveSpec drive = drive_of(cfg);
  const double w = omega_eff_of(cfg);
  require_regular(w, cfg);
  const bool secular = is_secular(w);

  EvolveOptions opts;
  opts.method = integrator_from_string(cfg.method);
    opts.precision = precision_from_string(cfg.precision);
  double max_dx = 0.0, max_dp = 0.0, max_var = 0.0, max_tail = 0.0;
  std::size_t points = 0;
  try {
    evolve_observe(coherent_state({cfg.n0, 0.0}, cfg.N), drive, grid_of(cfg), opts,
                   [&](double t, const FockVector& psi) {
                     const ObservableRecord r =
                         observables(psi, t, {ExpectationConvention::Normalized, false, {}});
                     const Quadratures q = secular ? secular_limit(cfg.n0, cfg.F0, t)
                                                   : quadratures_pt(cfg.n0, cfg.F0, w, t);
                     max_dx = std::max(max_dx, std::abs(r.x_mean - q.x));
                     max_dp = std::max(max_dp, std::abs(r.p_mean - q.p));
                     max_var = std::max(
                         {max_var, std::abs(r.var_x - 0.5), std::abs(r.var_p - 0.5)});
                     max_tail = std::max(max_tail, r.tail_mass);
                     ++points;
                   });
  } catch (const NormOverflowError& e) {
    throw UsageError(e.what());
  }
  const bool pass = max_dx <= cfg.compare_tol && max_dp <= cfg.compare_tol;
  const json j{{"params", params_json(cfg.n0, cfg.F0, w)},
               {"N", cfg.N},
               {"dt", cfg.dt},
               {"t_max", cfg.t_max},
               {"method", cfg.method},
               {"precision", cfg.precision},
               {"points", points},
               {"max_abs_dx", max_dx},
               {"max_abs_dp", max_dp},
               {"max_variance_deviation", max_var},
               {"max_tail_mass", max_tail},
               {"tolerance", cfg.compare_tol},
               {"pass", pass}};
  emit(cfg, j.dump(2) + "\n", out);
  return pass ? kOk : kVerificationFail;
}

int cmd_phase(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_valid(cfg);
  const SimulationGrid grid = grid_of(cfg);
  const std::vector<double> times = grid.times();
  const int stride = std::max(1, cfg.record_every);

  std::vector<double> oracle_theta;
  if (cfg.with_oracle) {
    DriveSpec drive{cfg.F0, 1.0, 1, DriveFamily::PtComplex};
    EvolveOptions opts;
    opts.method = integrator_from_string(cfg.method);
    opts.precision = precision_from_string(cfg.precision);
    evolve_observe(FockVector::basis(cfg.N, 0), drive, grid, opts,
                   [&](double, const FockVector& psi) {
                     oracle_theta.push_back(pegg_barnett_theta(psi, cfg.theta0));
                   });
  }

  std::vector<std::string> header{"t", "theta_closed", "square_wave_limit"};
  if (cfg.with_oracle) header.emplace_back("theta_pb");
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k % static_cast<std::size_t>(stride) != 0 && k + 1 != times.size()) continue;
    const double t = times[k];
    const double s = std::sin(t);
    const double sq = 0.5 * kPi * ((s > 0.0) - (s < 0.0) + 1.0);
    std::vector<double> row{t, phase_closed(cfg.F0, t), sq};
    if (cfg.with_oracle) row.push_back(oracle_theta[k]);
    rows.push_back(std::move(row));
  }
  const SquareWaveDeviation dev = phase_square_wave_deviation(cfg.F0, times);
  err << "square-wave deviation (|sin t| > 0.1): " << io::format_number(dev.max_deviation)
      << " over " << dev.guarded_points << " points\n";
  emit(cfg, table(cfg, header, rows), out);
  return kOk;
}

int cmd_wigner(const RunConfig& cfg, std::ostream& out) {
  const DriveSpec drive = drive_of(cfg);
  drive.check();
  FockVector psi = coherent_state({cfg.n0, 0.0}, cfg.N);
  if (cfg.t_max > cfg.t_start) {
    require_valid(cfg);
    EvolveOptions opts;
    opts.method = integrator_from_string(cfg.method);
    opts.precision = precision_from_string(cfg.precision);
    evolve_observe(psi, drive, grid_of(cfg), opts,
                   [&](double, const FockVector& state) { psi = state; });
  }
  if (cfg.grid_points < 2) throw UsageError("--grid-points must be >= 2");
  std::vector<double> axis(static_cast<std::size_t>(cfg.grid_points));
  for (int k = 0; k < cfg.grid_points; ++k) {
    axis[k] = -cfg.x_max + 2.0 * cfg.x_max * k / (cfg.grid_points - 1);
  }
  const WignerGrid w = wigner_grid(psi, axis, axis);
  if (cfg.format == "json") {
    json values = json::array();
    for (Eigen::Index i = 0; i < w.values.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < w.values.cols(); ++j) row.push_back(w.values(i, j));
      values.push_back(std::move(row));
    }
    const json j{{"t", cfg.t_max > cfg.t_start ? cfg.t_max : cfg.t_start},
                 {"x", w.xs},
                 {"p", w.ps},
                 {"values", values},
                 {"integral", w.integral},
                 {"support_captured", w.support_captured}};
    emit(cfg, j.dump(2) + "\n", out);
    return kOk;
  }
  std::ostringstream s;
  s << "x\\p";
  for (double p : w.ps) s << ',' << io::format_number(p);
  s << '\n';
  for (std::size_t i = 0; i < w.xs.size(); ++i) {
    s << io::format_number(w.xs[i]);
    for (std::size_t j = 0; j < w.ps.size(); ++j) {
      s << ',' << io::format_number(w.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    s << '\n';
  }
  emit(cfg, s.str(), out);
  return kOk;
}

int cmd_figures(const RunConfig& cfg, std::ostream& out) {
  std::vector<FigureSet> sets;
  for (const auto& f : kFigureSets) {
    if (cfg.set == "all" || cfg.set == f.name) sets.push_back(f);
  }
  if (sets.empty()) throw UsageError("unknown figure set '" + cfg.set + "'");

  fs::path dir = cfg.out.empty() ? fs::path(".") : fs::path(cfg.out);
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') dir = env;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory " + dir.string());

  CurveOptions opts;
  opts.samples = cfg.samples;
  bool all_pass = true;
  for (const auto& f : sets) {
    const CurveFamily fam = classify(f.n0, f.F0, f.omega, cfg.tol);
    const PlanarCurve orbit = trajectory_curve(f.n0, f.F0, f.omega, opts);
    const DualityReport dual = verify_duality(f.n0, f.F0, f.omega, 1e-6, opts);
    all_pass = all_pass && dual.pass;

    json j{{"set", f.name}};
    j.update(params_json(f.n0, f.F0, f.omega));
    j.update(family_json(fam));
    j["closure_period"] = orbit.period;
    j["duality"] = duality_json(dual);
    try {
      io::write_file_atomic(dir / (std::string(f.name) + ".json"), j.dump(2) + "\n");
      io::write_file_atomic(dir / (std::string(f.name) + ".svg"),
                            io::svg_polyline(orbit.points, f.name));
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
    out << f.name << ": " << to_string(fam.kind) << (dual.pass ? " duality PASS" : " duality FAIL")
        << '\n';
  }
  return all_pass ? kOk : kVerificationFail;
}

// ---------------------------------------------------------------------------

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) return args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) return args[k].substr(9);
  }
  return std::nullopt;
}

}  // namespace

std::string config_to_json(const RunConfig& cfg) {
  json j{{"subcommand", cfg.subcommand},
         {"n0", cfg.n0},
         {"F0", cfg.F0},
         {"omega", cfg.omega},
         {"sign", cfg.sign},
         {"family", cfg.family},
         {"N", cfg.N},
         {"dt", cfg.dt},
         {"t_start", cfg.t_start},
         {"t_max", cfg.t_max},
         {"tol", cfg.tol},
         {"compare_tol", cfg.compare_tol},
         {"method", cfg.method},
         {"precision", cfg.precision},
         {"record_every", cfg.record_every},
         {"secular_limit", cfg.secular_limit},
         {"numeric", cfg.numeric},
         {"with_oracle", cfg.with_oracle},
         {"theta0", cfg.theta0 ? json(*cfg.theta0) : json(nullptr)},
         {"R", cfg.R},
         {"r", cfg.r},
         {"d", cfg.d},
         {"x_max", cfg.x_max},
         {"grid_points", cfg.grid_points},
         {"samples", cfg.samples},
         {"set", cfg.set},
         {"out", cfg.out},
         {"format", cfg.format},
         {"seed", cfg.seed}};
  return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("malformed config: expected a JSON object");
  RunConfig cfg;
  static const std::map<std::string, std::function<void(RunConfig&, const json&)>> fields = {
      {"subcommand", [](RunConfig& c, const json& v) { c.subcommand = v.get<std::string>(); }},
      {"n0", [](RunConfig& c, const json& v) { c.n0 = v.get<double>(); }},
      {"F0", [](RunConfig& c, const json& v) { c.F0 = v.get<double>(); }},
      {"omega",
       [](RunConfig& c, const json& v) {
         c.omega = v.is_string() ? io::parse_ratio(v.get<std::string>()) : v.get<double>();
       }},
      {"sign", [](RunConfig& c, const json& v) { c.sign = v.get<int>(); }},
      {"family", [](RunConfig& c, const json& v) { c.family = v.get<std::string>(); }},
      {"N", [](RunConfig& c, const json& v) { c.N = v.get<int>(); }},
      {"dt", [](RunConfig& c, const json& v) { c.dt = v.get<double>(); }},
      {"t_start", [](RunConfig& c, const json& v) { c.t_start = v.get<double>(); }},
      {"t_max", [](RunConfig& c, const json& v) { c.t_max = v.get<double>(); }},
      {"tol", [](RunConfig& c, const json& v) { c.tol = v.get<double>(); }},
      {"compare_tol", [](RunConfig& c, const json& v) { c.compare_tol = v.get<double>(); }},
      {"method", [](RunConfig& c, const json& v) { c.method = v.get<std::string>(); }},
      {"precision", [](RunConfig& c, const json& v) { c.precision = v.get<std::string>(); }},
      {"record_every", [](RunConfig& c, const json& v) { c.record_every = v.get<int>(); }},
      {"secular_limit", [](RunConfig& c, const json& v) { c.secular_limit = v.get<bool>(); }},
      {"numeric", [](RunConfig& c, const json& v) { c.numeric = v.get<bool>(); }},
      {"with_oracle", [](RunConfig& c, const json& v) { c.with_oracle = v.get<bool>(); }},
      {"theta0",
       [](RunConfig& c, const json& v) {
         if (v.is_null()) {
           c.theta0.reset();
         } else {
           c.theta0 = v.get<double>();
         }
       }},
      {"R", [](RunConfig& c, const json& v) { c.R = v.get<double>(); }},
      {"r", [](RunConfig& c, const json& v) { c.r = v.get<double>(); }},
      {"d", [](RunConfig& c, const json& v) { c.d = v.get<double>(); }},
      {"x_max", [](RunConfig& c, const json& v) { c.x_max = v.get<double>(); }},
      {"grid_points", [](RunConfig& c, const json& v) { c.grid_points = v.get<int>(); }},
      {"samples", [](RunConfig& c, const json& v) { c.samples = v.get<int>(); }},
      {"set", [](RunConfig& c, const json& v) { c.set = v.get<std::string>(); }},
      {"out", [](RunConfig& c, const json& v) { c.out = v.get<std::string>(); }},
      {"format", [](RunConfig& c, const json& v) { c.format = v.get<std::string>(); }},
      {"seed", [](RunConfig& c, const json& v) { c.seed = v.get<std::uint64_t>(); }},
  };
  for (const auto& [key, value] : j.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw std::invalid_argument("malformed config: unknown key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const json::exception& e) {
      throw std::invalid_argument("malformed config: bad value for '" + key + "': " + e.what());
    }
  }
  return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (const auto path = find_config_path(args)) {
    std::ifstream f(*path);
    if (!f) {
      err << "error: cannot read config file " << *path << '\n';
      return kValidationError;
    }
    std::stringstream buf;
    buf << f.rdbuf();
    try {
      cfg = config_from_json(buf.str());
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kValidationError;
    }
  }

  CLI::App app{"PT-driven quantum oscillator: closed-form orbits, Foucault duality, Fock-space oracle"};
  app.require_subcommand(0, 1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file mirroring every flag");

  std::string omega_text;
  std::optional<double> theta0_flag;
  auto physics = [&](CLI::App* sub) {
    sub->add_option("--n0", cfg.n0, "initial coherent amplitude")->capture_default_str();
    sub->add_option("--f0", cfg.F0, "drive amplitude F0")->capture_default_str();
    sub->add_option("--omega", omega_text, "drive frequency ratio (decimal or p/q)");
    sub->add_option("--sign", cfg.sign, "+1 for exp(+i omega t), -1 for exp(-i omega t)")
        ->check(CLI::IsMember({-1, 1}))
        ->capture_default_str();
    sub->add_option("--family", cfg.family, "pt | cos")->capture_default_str();
    sub->add_option("--tol", cfg.tol, "classification / circularity tolerance")->capture_default_str();
  };
  auto timeline = [&](CLI::App* sub) {
    sub->add_option("--dt", cfg.dt, "time step")->capture_default_str();
    sub->add_option("--t-start", cfg.t_start, "first time")->capture_default_str();
    sub->add_option("--t-max", cfg.t_max, "last time")->capture_default_str();
  };
  auto oracle_opts = [&](CLI::App* sub) {
    sub->add_option("--N", cfg.N, "Fock-space dimension")->capture_default_str();
    sub->add_option("--method", cfg.method, "rk4 | midpoint-exp | taylor")->capture_default_str();
    sub->add_option("--precision", cfg.precision, "double | quad | digits50 (taylor only)")
        ->capture_default_str();
    sub->add_option("--record-every", cfg.record_every, "emit every k-th grid time")->capture_default_str();
    sub->add_option("--theta0", theta0_flag, "Pegg-Barnett window start (default -pi (N-1)/N)");
  };
  auto output = [&](CLI::App* sub, bool tabular) {
    sub->add_option("--out", cfg.out, "output path (stdout when omitted)");
    if (tabular) sub->add_option("--format", cfg.format, "csv | json")->capture_default_str();
  };

  auto* traj = app.add_subcommand(
      "trajectory", "closed-form quadratures; CSV columns: t,x_mean,p_mean,var_x,var_p,radius,theta");
  physics(traj);
  timeline(traj);
  output(traj, true);
  traj->add_flag("--secular-limit", cfg.secular_limit, "evaluate the omega_eff = -1 limit formula");

  auto* wn = app.add_subcommand(
      "wn", "Wei-Norman coefficients; CSV columns: t,re_f0,im_f0,re_f1,im_f1,re_f2,im_f2,re_f3,im_f3");
  physics(wn);
  timeline(wn);
  output(wn, true);
  wn->add_flag("--numeric", cfg.numeric, "use quadrature for f2/f3 even for the PT drive");

  auto* circ = app.add_subcommand(
      "circular",
      "circular drive strength; JSON {n0,omega_eff,F0,circular,radius,frequency,max_radius_deviation}");
  physics(circ);
  output(circ, false);

  auto* cls = app.add_subcommand(
      "classify", "curve family; JSON {n0,F0,omega,family,radius?,frequency?,semi_axis_*?,lobes?,c1,c2}");
  physics(cls);
  output(cls, false);

  auto* map = app.add_subcommand("map", "hypotrochoid parameters; JSON {params,hypotrochoid:{R,r,d},degenerate}");
  physics(map);
  output(map, false);

  auto* inv = app.add_subcommand(
      "inverse-map", "oscillator parameters from (R,r,d); JSON {hypotrochoid,mappable,solutions,reason,candidate_family}");
  inv->add_option("--R", cfg.R, "fixed circle radius")->capture_default_str();
  inv->add_option("--r", cfg.r, "rolling circle radius")->capture_default_str();
  inv->add_option("--d", cfg.d, "pen offset")->capture_default_str();
  output(inv, false);

  auto* dual = app.add_subcommand(
      "verify-duality",
      "trajectory vs hypotrochoid similarity fit; JSON {params,hypotrochoid:{R,r,d},fit:{scale,rotation,"
      "reflection,parameter_shift,residual},expected_scale,scale_matches,tolerance,pass}; exit 2 on FAIL");
  physics(dual);
  dual->add_option("--samples", cfg.samples, "samples per curve")->capture_default_str();
  output(dual, false);

  auto* orc = app.add_subcommand(
      "oracle",
      "truncated Fock-space evolution; CSV columns: t,x_mean,p_mean,var_x,var_p,n_mean,norm,theta_pb,tail_mass");
  physics(orc);
  timeline(orc);
  oracle_opts(orc);
  output(orc, true);

  auto* cmp = app.add_subcommand(
      "compare",
      "closed form vs oracle; JSON {params,N,dt,t_max,method,points,max_abs_dx,max_abs_dp,"
      "max_variance_deviation,max_tail_mass,tolerance,pass}; exit 2 on FAIL");
  physics(cmp);
  timeline(cmp);
  oracle_opts(cmp);
  output(cmp, false);
  cmp->add_option("--compare-tol", cfg.compare_tol, "max allowed |dx|, |dp|")->capture_default_str();
  cmp->add_flag("--secular-limit", cfg.secular_limit, "compare against the omega_eff = -1 limit");

  auto* ph = app.add_subcommand(
      "phase", "closed-form Pegg-Barnett phase; CSV columns: t,theta_closed,square_wave_limit[,theta_pb]");
  physics(ph);
  timeline(ph);
  oracle_opts(ph);
  output(ph, true);
  ph->add_flag("--with-oracle", cfg.with_oracle, "add theta_pb of the evolved resonant vacuum");

  auto* wig = app.add_subcommand(
      "wigner",
      "Wigner function of the evolved coherent state at t-max; CSV matrix (header x\\p,p...) or "
      "JSON {t,x,p,values,integral,support_captured}");
  physics(wig);
  timeline(wig);
  oracle_opts(wig);
  output(wig, true);
  wig->add_option("--x-max", cfg.x_max, "grid half-width")->capture_default_str();
  wig->add_option("--grid-points", cfg.grid_points, "points per axis")->capture_default_str();

  auto* fig = app.add_subcommand(
      "figures",
      "figure parameter sets as <set>.svg + <set>.json {set,n0,F0,omega,family,...,closure_period,duality}");
  fig->add_option("--set", cfg.set, "fig1a..fig1f, fig2a..fig2e or all")->capture_default_str();
  fig->add_option("--out", cfg.out, "output directory");
  fig->add_option("--samples", cfg.samples, "samples per curve")->capture_default_str();
  fig->add_option("--tol", cfg.tol, "classification tolerance")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }

  const auto subs = app.get_subcommands();
  if (!subs.empty()) cfg.subcommand = subs.front()->get_name();
  if (cfg.subcommand.empty()) {
    out << app.help();
    return kValidationError;
  }

  try {
    if (!omega_text.empty()) cfg.omega = io::parse_ratio(omega_text);
    if (theta0_flag) cfg.theta0 = theta0_flag;
    if (cfg.format != "csv" && cfg.format != "json") throw UsageError("--format must be csv or json");

    const std::string& s = cfg.subcommand;
    if (s == "trajectory") return cmd_trajectory(cfg, out);
    if (s == "wn") return cmd_wn(cfg, out, err);
    if (s == "circular") return cmd_circular(cfg, out);
    if (s == "classify") return cmd_classify(cfg, out);
    if (s == "map") return cmd_map(cfg, out);
    if (s == "inverse-map") return cmd_inverse_map(cfg, out);
    if (s == "verify-duality") return cmd_verify_duality(cfg, out);
    if (s == "oracle") return cmd_oracle(cfg, out, err);
    if (s == "compare") return cmd_compare(cfg, out);
    if (s == "phase") return cmd_phase(cfg, out, err);
    if (s == "wigner") return cmd_wigner(cfg, out);
    if (s == "figures") return cmd_figures(cfg, out);
    throw UsageError("unknown subcommand '" + s + "'");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args, std::cout, std::cerr);
}

}  // namespace ptfoucault::cli
