#ifndef POLYREG_EXPERIMENTS_HPP
#define POLYREG_EXPERIMENTS_HPP

// Command implementations behind the command-line tool. Each command takes
// a parsed configuration and returns its report text and CSV tables; the
// caller decides where they are written.

#include <polyreg/checks.hpp>
#include <polyreg/conditions.hpp>
#include <polyreg/config.hpp>
#include <polyreg/io.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace polyreg {

struct CommandOutput
{
  int exit_code = 0;
  std::string report;
  CsvTable results;
  CsvTable witnesses;
  /// Additional CSV files by name, written next to results.csv.
  std::map<std::string, CsvTable> extra;
};

inline void write_outputs(const CommandOutput& out, const std::filesystem::path& dir)
{
  std::filesystem::create_directories(dir);
  write_text_file(dir / "report.txt", out.report);
  write_text_file(dir / "results.csv", out.results.str());
  write_text_file(dir / "witnesses.csv", out.witnesses.str());
  for (const auto& [name, table] : out.extra) write_text_file(dir / name, table.str());
}

/// Seeds of the individual random streams, all derived from the run seed.
struct SeedPlan
{
  std::uint64_t neighbourhood, directions, minimality, growth, noise, checks;

  static SeedPlan from(std::uint64_t seed) { return {seed, seed + 1, seed + 2, seed + 3, seed, seed + 10}; }
};

inline Verdict worse(Verdict a, Verdict b)
{
  auto rank = [](Verdict v) { return v == Verdict::violated ? 2 : v == Verdict::hypotheses_not_met ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

/// Everything derived from a configuration before any command-specific work.
struct Setup
{
  ExperimentConfig cfg;
  SeedPlan seeds;
  GridDomain dom;
  Scenario scn;
  double R_udag = 0.0;
  GrowthReport growth;
  bool growth_configured = false;
  MinimalityReport minimality;
  std::vector<HypothesisCheck> hypotheses;
};

inline Setup prepare(const ExperimentConfig& cfg)
{
  Setup s;
  s.cfg = cfg;
  s.seeds = SeedPlan::from(cfg.seed);
  s.dom = build_domain(cfg);
  const auto reg = build_regularizer(cfg, s.dom);
  s.scn = make_scenario(build_operator(cfg, s.dom), reg, build_solution(cfg, s.dom));
  s.R_udag = eval_R(*reg, s.scn.udag);
  if (const auto cert = build_growth(cfg, s.dom)) {
    s.growth_configured = true;
    GrowthSampling gs;
    gs.samples = cfg.growth.samples;
    gs.seed = s.seeds.growth;
    s.growth = check_growth(*reg, *cert, gs);
  }
  MinimalitySampling ms;
  ms.samples = cfg.sampling.minimality_samples;
  ms.seed = s.seeds.minimality;
  s.minimality = check_minimality(s.scn, ms);
  s.hypotheses = rancon_hypotheses(s.scn, s.growth, s.minimality);
  if (!s.growth_configured) s.hypotheses.front().detail = "no growth certificate configured";
  return s;
}

inline std::string checklist_text(const std::vector<HypothesisCheck>& hs)
{
  std::ostringstream o;
  o << "Hypothesis checklist\n";
  for (const auto& h : hs) o << "  [" << (h.passed ? "pass" : "FAIL") << "] " << h.name << ": " << h.detail << "\n";
  return o.str();
}

inline std::string scenario_summary(const Setup& s)
{
  std::ostringstream o;
  o << "Scenario\n";
  o << "  grid: " << s.dom.dim() << "-d, " << s.dom.node_count() << " nodes, " << s.dom.cell_count() << " cells\n";
  o << "  integrand: " << s.scn.reg->integrand().name() << ", N = " << s.cfg.space.components
    << ", p = " << format_double(s.cfg.space.exponent) << "\n";
  o << "  operator: " << s.scn.op->name() << ", data dimension " << s.scn.op->data_dim() << "\n";
  o << "  R(u†) = " << format_double(s.R_udag) << ", |v†| = " << format_double(data_norm(s.scn.vdag)) << "\n";
  o << "  seed: " << s.cfg.seed << "\n";
  return o.str();
}

inline void add_field_header(std::vector<std::string>& h, int dim, int N, const std::string& prefix)
{
  for (int a = 0; a < dim; ++a) h.push_back("x" + std::to_string(a));
  for (int c = 0; c < N; ++c) h.push_back(prefix + std::to_string(c));
}

// ---------------------------------------------------------------------------
// print-scenario

inline CommandOutput cmd_print_scenario(const ExperimentConfig& cfg)
{
  const Setup s = prepare(cfg);
  CommandOutput out;
  std::ostringstream o;
  o << checklist_text(s.hypotheses) << "\n" << scenario_summary(s) << "\nConfiguration\n" << serialize_config(s.cfg);
  out.report = o.str();

  const int N = s.cfg.space.components;
  std::vector<std::string> h{"node"};
  add_field_header(h, s.dom.dim(), N, "u");
  out.results = CsvTable(h);
  for (std::size_t i = 0; i < s.dom.node_count(); ++i) {
    auto row = out.results.row();
    row << static_cast<unsigned long>(i);
    const Eigen::VectorXd x = s.dom.node_position(i);
    for (Eigen::Index a = 0; a < x.size(); ++a) row << x(a);
    for (int c = 0; c < N; ++c) row << s.scn.udag.values()(static_cast<Eigen::Index>(i) * N + c);
  }
  out.witnesses = CsvTable({"sample"});
  return out;
}

// ---------------------------------------------------------------------------
// check-conditions

struct ConditionsOutcome
{
  Setup setup;
  RangeConditionResult range;
  SourceConditionParams params;
  std::optional<RadiusSweep> sweep;
  NeighbourhoodSampling sampling;
  Neighbourhood neighbourhood;
  VariationalInequalityReport vi;
  NonlinearityReport nonlinearity;
  ConverseReport converse;
  RanconReport rancon;
  Verdict verdict = Verdict::hypotheses_not_met;
  std::string failure;
};

inline ConditionsOutcome run_conditions(const ExperimentConfig& cfg)
{
  ConditionsOutcome r;
  r.setup = prepare(cfg);
  const Setup& s = r.setup;
  const Scenario& scn = s.scn;
  if (scn.has_subgradient()) r.range = range_condition_solve(scn);

  const double beta2 = cfg.conditions.beta2 ? *cfg.conditions.beta2
                                            : std::max(r.range.bound_constant, std::numeric_limits<double>::min());
  try {
    r.params = SourceConditionParams::make(cfg.conditions.beta1, beta2, cfg.conditions.alpha_bar, cfg.conditions.rho,
                                           s.R_udag);
  } catch (const Error& e) {
    throw Error(ErrorKind::config, std::string("condition parameters rejected: ") + e.what());
  }

  r.sampling.count = cfg.sampling.count;
  r.sampling.t_min = cfg.sampling.t_min;
  r.sampling.t_max = cfg.sampling.t_max;
  r.sampling.seed = s.seeds.neighbourhood;
  if (!cfg.sampling.sweep_radii.empty() && scn.has_subgradient()) {
    r.sweep = nonlinearity_radius_sweep(scn, r.params, r.range.omega_star, cfg.conditions.beta1,
                                        cfg.sampling.sweep_radii, r.sampling, cfg.sampling.sweep_inner_ratio);
    if (r.sweep->chosen_radius) {
      r.sampling.t_max = *r.sweep->chosen_radius;
      r.sampling.t_min = *r.sweep->chosen_radius * cfg.sampling.sweep_inner_ratio;
    }
  }

  try {
    r.neighbourhood = sample_neighbourhood(scn, r.params, r.sampling);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::neighbourhood_empty) throw;
    r.failure = e.what();
    r.verdict = Verdict::hypotheses_not_met;
    return r;
  }
  const auto& samples = r.neighbourhood.fields;
  const auto dirs = random_directions(scn, cfg.sampling.directions, s.seeds.directions);

  r.vi = check_variational_inequality(scn, r.params, samples);
  if (scn.has_subgradient()) r.nonlinearity = check_nonlinearity_condition(scn, r.range.omega_star, cfg.conditions.beta1, samples);
  r.converse = verify_theorem_converse(scn, cfg.conditions.beta1, r.params, samples);
  r.rancon = verify_theorem_rancon(scn, r.params, s.growth, s.minimality, samples, dirs);
  if (!s.growth_configured && r.rancon.stage == "growth condition")
    r.rancon.hypotheses.front().detail = "no growth certificate configured";
  r.verdict = worse(r.converse.verdict, r.rancon.verdict);
  return r;
}

inline std::string conditions_text(const ConditionsOutcome& r)
{
  std::ostringstream o;
  const auto& p = r.params;
  o << "Source condition parameters\n";
  o << "  beta1 = " << format_double(p.beta1) << ", beta2 = " << format_double(p.beta2)
    << (r.setup.cfg.conditions.beta2 ? "" : " (|omega*|)") << ", alpha_bar = " << format_double(p.alpha_bar)
    << ", rho = " << format_double(p.rho) << "\n\n";
  o << "Range condition\n";
  if (r.setup.scn.has_subgradient()) {
    o << "  residual = " << format_double(r.range.residual) << " (threshold "
      << format_double(range_tolerance * (1.0 + r.range.target_norm)) << "), |omega*| = "
      << format_double(r.range.bound_constant) << (r.range.ridge_used ? ", ridge fallback used" : "")
      << (r.range.in_range ? ", in range" : ", NOT in range") << "\n\n";
  } else {
    o << "  not evaluated: " << r.setup.scn.subgradient_error << "\n\n";
  }
  if (r.sweep) {
    o << "Nonlinearity radius sweep (beta1 = " << format_double(p.beta1) << ")\n";
    for (const auto& row : r.sweep->rows)
      o << "  radius " << format_double(row.radius) << ": " << row.accepted << " samples, max excess "
        << format_double(row.report.max_excess) << ", beta1 threshold " << format_double(row.report.beta1_threshold)
        << (row.report.passed ? ", pass" : ", FAIL") << "\n";
    o << "  chosen radius: "
      << (r.sweep->chosen_radius ? format_double(*r.sweep->chosen_radius) : std::string("none")) << "\n\n";
  }
  o << "Neighbourhood\n";
  o << "  t in [" << format_double(r.sampling.t_min) << ", " << format_double(r.sampling.t_max) << "], "
    << r.neighbourhood.fields.size() << " samples accepted of " << r.neighbourhood.attempts << " drawn\n";
  if (!r.failure.empty()) {
    o << "  " << r.failure << "\n\nVerdict: " << to_string(r.verdict) << "\n";
    return o.str();
  }
  o << "\nVariational inequality\n";
  o << "  " << r.vi.evaluated << " evaluated, " << r.vi.skipped << " skipped, worst margin "
    << format_double(r.vi.worst_margin) << (r.vi.passed ? ", pass" : ", FAIL");
  if (!r.vi.passed && r.vi.witness) o << " (witness sample " << *r.vi.witness << ")";
  o << "\n\n";
  if (r.setup.scn.has_subgradient()) {
    o << "Nonlinearity condition\n";
    o << "  max excess " << format_double(r.nonlinearity.max_excess) << ", operator term "
      << format_double(r.nonlinearity.max_operator_term) << ", w term " << format_double(r.nonlinearity.max_w_term)
      << ", beta1 threshold " << format_double(r.nonlinearity.beta1_threshold)
      << (r.nonlinearity.passed ? ", pass" : ", FAIL") << "\n\n";
  }
  o << "Converse direction (range + nonlinearity => inequality)\n";
  for (const auto& h : r.converse.hypotheses)
    o << "  [" << (h.passed ? "pass" : "FAIL") << "] " << h.name << ": " << h.detail << "\n";
  if (r.converse.derived)
    o << "  inequality with beta2 = " << format_double(r.converse.derived->beta2) << ": worst margin "
      << format_double(r.converse.vi.worst_margin) << "\n";
  o << "  verdict: " << to_string(r.converse.verdict) << " (stage: " << r.converse.stage << ")\n\n";
  o << "Direct direction (inequality => range condition)\n";
  const bool reached = std::all_of(r.rancon.hypotheses.begin(), r.rancon.hypotheses.end(),
                                   [](const HypothesisCheck& h) { return h.passed; });
  o << "  derivative coincidence: " << (reached ? format_double(r.rancon.coincidence) : "not reached") << "\n";
  if (r.rancon.differentiated.directions > 0)
    o << "  differentiated inequality over " << r.rancon.differentiated.directions << " directions: worst "
      << format_double(r.rancon.differentiated.worst_value) << ", two-sided slack "
      << format_double(r.rancon.differentiated.worst_corollary_slack) << "\n";
  o << "  verdict: " << to_string(r.rancon.verdict) << " (stage: " << r.rancon.stage << ")\n";
  if (r.rancon.verdict == Verdict::hypotheses_not_met) o << "  no implication is claimed\n";
  o << "\nVerdict: " << to_string(r.verdict) << "\n";
  return o.str();
}

inline CommandOutput cmd_check_conditions(const ExperimentConfig& cfg)
{
  const ConditionsOutcome r = run_conditions(cfg);
  const Setup& s = r.setup;
  CommandOutput out;
  out.exit_code = exit_code(r.verdict);
  out.report = checklist_text(s.hypotheses) + "\n" + scenario_summary(s) + "\n" + conditions_text(r);

  out.results = CsvTable({"sample", "radius", "data_residual", "bregman", "vi_margin", "operator_term", "w_term"});
  const auto& fields = r.neighbourhood.fields;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < fields.size(); ++k) {
    auto row = out.results.row();
    const double res = data_norm(s.scn.op->apply(fields[k]) - s.scn.vdag);
    const bool have_nl = k < r.nonlinearity.rows.size() && !r.nonlinearity.rows[k].skipped;
    double D = nan;
    if (have_nl)
      D = r.nonlinearity.rows[k].bregman;
    else if (std::isfinite(r.vi.margins[k]))
      D = bregman(*s.scn.reg, s.scn.w, fields[k], s.scn.udag).value;
    row << static_cast<unsigned long>(k) << r.neighbourhood.radii[k] << res << D << r.vi.margins[k]
        << (have_nl ? r.nonlinearity.rows[k].operator_term : nan) << (have_nl ? r.nonlinearity.rows[k].w_term : nan);
  }

  const int N = s.cfg.space.components;
  std::vector<std::string> h{"sample", "node"};
  add_field_header(h, s.dom.dim(), N, "u");
  for (int c = 0; c < N; ++c) h.push_back("udag" + std::to_string(c));
  out.witnesses = CsvTable(h);
  if (r.failure.empty() && !r.vi.passed && r.vi.witness) {
    const GridField& u = fields[*r.vi.witness];
    for (std::size_t i = 0; i < s.dom.node_count(); ++i) {
      auto row = out.witnesses.row();
      row << static_cast<unsigned long>(*r.vi.witness) << static_cast<unsigned long>(i);
      const Eigen::VectorXd x = s.dom.node_position(i);
      for (Eigen::Index a = 0; a < x.size(); ++a) row << x(a);
      for (int c = 0; c < N; ++c) row << u.values()(static_cast<Eigen::Index>(i) * N + c);
      for (int c = 0; c < N; ++c) row << s.scn.udag.values()(static_cast<Eigen::Index>(i) * N + c);
    }
  }
  if (r.sweep) {
    CsvTable sweep({"radius", "accepted", "max_excess", "max_operator_term", "max_w_term", "beta1_threshold", "passed"});
    for (const auto& row : r.sweep->rows)
      sweep.row() << row.radius << static_cast<unsigned long>(row.accepted) << row.report.max_excess
                  << row.report.max_operator_term << row.report.max_w_term << row.report.beta1_threshold
                  << row.report.passed;
    out.extra["sweep.csv"] = std::move(sweep);
  }
  return out;
}

// ---------------------------------------------------------------------------
// rate-experiment

struct RateRecord
{
  double delta = 0.0;
  double alpha = 0.0;
  double bregman = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  SolverStatus status = SolverStatus::max_iterations;
  double grad_norm = 0.0;
  double objective = 0.0;
  std::string diagnostic;
  bool flagged() const { return status != SolverStatus::converged; }
};

struct SlopeFit
{
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  std::size_t points = 0;
  bool valid() const { return points >= 2; }
};

/// Least-squares line through (log x, log y) over pairs with x, y > 0.
inline SlopeFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y)
{
  SlopeFit f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
    ++f.points;
  }
  if (f.points < 2) return f;
  const double n = static_cast<double>(f.points);
  const double den = n * sxx - sx * sx;
  if (den == 0.0) {
    f.points = 0;
    return f;
  }
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

struct RateOutcome
{
  ConditionsOutcome conditions;
  bool precondition_met = false;
  std::vector<RateRecord> records;
  std::vector<GridField> solutions;
  std::vector<std::vector<SolverIterate>> traces;
  SlopeFit fit;
  bool slope_in_bounds = true;
};

inline double rate_alpha(const RateSpec& r, double delta)
{
  return r.alpha_coefficient * std::pow(delta, r.alpha_exponent);
}

/// Runs `count` independent jobs on up to `jobs` threads; job k writes only
/// slot k of its output, so results do not depend on scheduling.
template <class Fn>
void run_jobs(std::size_t count, unsigned jobs, Fn&& fn)
{
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), count));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = next++; k < count; k = next++) fn(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline RateOutcome run_rate(const ExperimentConfig& cfg, unsigned jobs = 1)
{
  RateOutcome r;
  r.conditions = run_conditions(cfg);
  const Setup& s = r.conditions.setup;
  r.precondition_met =
    r.conditions.converse.verdict == Verdict::holds || r.conditions.rancon.verdict == Verdict::holds;
  if (!r.precondition_met) return r;

  const auto& deltas = cfg.rate.deltas;
  for (double d : deltas) require(d > 0.0, ErrorKind::config, "rate.deltas: noise levels must be positive");
  const SolverConfig solver = build_solver(cfg);
  r.records.resize(deltas.size());
  r.solutions.resize(deltas.size());
  r.traces.resize(deltas.size());
  const GridField init(s.dom, s.cfg.space.components);
  run_jobs(deltas.size(), jobs, [&](std::size_t k) {
    const double delta = deltas[k];
    const DataVector vd = add_noise(s.scn.vdag, delta, s.seeds.noise);
    RateRecord rec;
    rec.delta = delta;
    rec.alpha = rate_alpha(cfg.rate, delta);
    std::vector<SolverIterate> trace;
    std::function<void(const SolverIterate&)> cb;
    if (cfg.solver.trace) cb = [&trace](const SolverIterate& it) { trace.push_back(it); };
    const auto res = minimize_tikhonov(*s.scn.op, *s.scn.reg, TikhonovParams(rec.alpha, 2.0), vd, init, solver, cb);
    rec.iterations = res.iterations;
    rec.status = res.status;
    rec.grad_norm = res.grad_norm;
    rec.objective = res.objective;
    rec.diagnostic = res.diagnostic;
    rec.residual = data_norm(s.scn.op->apply(res.u) - vd);
    rec.bregman = bregman(*s.scn.reg, s.scn.w, res.u, s.scn.udag).value;
    r.records[k] = rec;
    r.solutions[k] = res.u;
    r.traces[k] = std::move(trace);
  });

  std::vector<double> x, y;
  for (const auto& rec : r.records)
    if (!rec.flagged()) {
      x.push_back(rec.delta);
      y.push_back(rec.bregman);
    }
  r.fit = fit_log_log(x, y);
  if (cfg.rate.slope_min) r.slope_in_bounds = r.slope_in_bounds && r.fit.valid() && r.fit.slope >= *cfg.rate.slope_min;
  if (cfg.rate.slope_max) r.slope_in_bounds = r.slope_in_bounds && r.fit.valid() && r.fit.slope <= *cfg.rate.slope_max;
  return r;
}

inline CommandOutput cmd_rate_experiment(const ExperimentConfig& cfg, unsigned jobs = 1)
{
  const RateOutcome r = run_rate(cfg, jobs);
  const Setup& s = r.conditions.setup;
  CommandOutput out;
  std::ostringstream o;
  o << checklist_text(s.hypotheses) << "\n" << scenario_summary(s) << "\n";
  o << "Source condition\n  converse: " << to_string(r.conditions.converse.verdict)
    << ", direct: " << to_string(r.conditions.rancon.verdict) << "\n\n";
  out.results = CsvTable({"delta", "alpha", "bregman", "residual", "iterations", "status", "grad_norm", "objective",
                          "flagged"});
  out.witnesses = CsvTable({"delta", "diagnostic"});
  if (!r.precondition_met) {
    o << "Rate experiment not run: neither direction of the source condition was verified\n";
    out.exit_code = exit_code(Verdict::hypotheses_not_met);
    out.report = o.str();
    return out;
  }
  o << "Rate experiment (alpha = " << format_double(cfg.rate.alpha_coefficient) << " * delta^"
    << format_double(cfg.rate.alpha_exponent) << ", q = 2)\n";
  for (const auto& rec : r.records) {
    out.results.row() << rec.delta << rec.alpha << rec.bregman << rec.residual
                      << static_cast<unsigned long>(rec.iterations) << to_string(rec.status) << rec.grad_norm
                      << rec.objective << rec.flagged();
    o << "  delta " << format_double(rec.delta) << ": D = " << format_double(rec.bregman) << ", residual "
      << format_double(rec.residual) << ", " << rec.iterations << " iterations, " << to_string(rec.status) << "\n";
    if (rec.flagged()) out.witnesses.row() << rec.delta << rec.diagnostic;
  }
  if (r.fit.valid())
    o << "Fitted log-log slope of D against delta: " << format_double(r.fit.slope) << " over " << r.fit.points
      << " points\n";
  else
    o << "Fitted slope unavailable: fewer than two usable points\n";
  if (cfg.rate.slope_min || cfg.rate.slope_max)
    o << "Expected slope range [" << (cfg.rate.slope_min ? format_double(*cfg.rate.slope_min) : "-inf") << ", "
      << (cfg.rate.slope_max ? format_double(*cfg.rate.slope_max) : "inf") << "]: "
      << (r.slope_in_bounds ? "met" : "NOT met") << "\n";
  out.exit_code = r.fit.valid() && r.slope_in_bounds ? 0 : 1;
  out.report = o.str();

  if (cfg.solver.trace) {
    CsvTable trace({"delta", "iter", "objective", "grad_norm", "step"});
    for (std::size_t k = 0; k < r.traces.size(); ++k)
      for (const auto& it : r.traces[k])
        trace.row() << r.records[k].delta << static_cast<unsigned long>(it.iter) << it.objective << it.grad_norm
                    << it.step;
    out.extra["solver_trace.csv"] = std::move(trace);
  }
  return out;
}

// ---------------------------------------------------------------------------
// verify-gradients

struct GradientOutcome
{
  Setup setup;
  std::vector<CheckSuite> suites;
  std::vector<BiasDetection> bias;
  bool passed = false;
};

inline GradientOutcome run_gradients(const ExperimentConfig& cfg)
{
  GradientOutcome r;
  r.setup = prepare(cfg);
  const Setup& s = r.setup;
  const auto& g = cfg.gradients;
  const FieldSampling fs{g.amplitude, g.offset};
  const std::uint64_t seed = s.seeds.checks;
  const Regularizer& reg = *s.scn.reg;
  const int N = cfg.space.components;

  r.suites.push_back(check_minors_jacobians(g.matrices, seed));
  r.suites.push_back(check_regularizer_derivative(reg, g.pairs, seed + 1, fs));
  for (double b : {-g.bias, g.bias}) r.bias.push_back(check_bias_detection(reg, b, g.pairs, seed + 2, fs));
  r.suites.push_back(check_wpoly_derivative(s.dom, N, g.pairs, seed + 3));
  r.suites.push_back(check_wpoly_linear_case(s.dom, N, g.pairs, seed + 4));
  if (s.scn.has_subgradient()) {
    r.suites.push_back(check_subgradient_property(reg, s.scn.udag, g.fields, seed + 5, fs));
    r.suites.push_back(check_coincidence(reg, 10, seed + 6, fs));
  }
  r.suites.push_back(check_operator_adjoint(*s.scn.op, 100, seed + 7));
  r.suites.push_back(check_operator_derivative(*s.scn.op, 10, seed + 8));

  r.passed = std::all_of(r.suites.begin(), r.suites.end(), [](const CheckSuite& c) { return c.passed(); }) &&
             std::all_of(r.bias.begin(), r.bias.end(), [](const BiasDetection& b) { return b.detected(); });
  return r;
}

inline CommandOutput cmd_verify_gradients(const ExperimentConfig& cfg)
{
  const GradientOutcome r = run_gradients(cfg);
  CommandOutput out;
  std::ostringstream o;
  o << checklist_text(r.setup.hypotheses) << "\n" << scenario_summary(r.setup) << "\nDerivative checks\n";
  out.results = CsvTable({"suite", "label", "index", "analytic", "reference", "error", "tolerance", "passed"});
  out.witnesses = CsvTable({"suite", "label", "index", "analytic", "reference", "error", "tolerance"});
  for (const auto& suite : r.suites) {
    o << "  [" << (suite.passed() ? "pass" : "FAIL") << "] " << suite.name << ": " << suite.rows.size()
      << " cases, worst error " << format_double(suite.worst_error()) << "\n";
    for (const auto& row : suite.rows) {
      out.results.row() << row.suite << row.label << static_cast<unsigned long>(row.index) << row.analytic
                        << row.reference << row.error << row.tolerance << row.passed;
      if (!row.passed)
        out.witnesses.row() << row.suite << row.label << static_cast<unsigned long>(row.index) << row.analytic
                            << row.reference << row.error << row.tolerance;
    }
  }
  for (const auto& b : r.bias)
    o << "  [" << (b.detected() ? "pass" : "FAIL") << "] derivative bias " << format_double(b.bias) << ": caught in "
      << b.caught << " of " << b.pairs << " pairs\n";
  o << "\nVerdict: " << (r.passed ? "all checks passed" : "failures found") << "\n";
  out.report = o.str();
  out.exit_code = r.passed ? 0 : 1;
  return out;
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& command_names()
{
  static const std::vector<std::string> names{"verify-gradients", "check-conditions", "rate-experiment",
                                              "print-scenario"};
  return names;
}

inline std::string command_description(const std::string& name)
{
  if (name == "verify-gradients") return "derivative checks against finite differences";
  if (name == "check-conditions") return "source-condition pipeline and theorem verdicts";
  if (name == "rate-experiment") return "Tikhonov solves over noise levels and log-log rate fit";
  if (name == "print-scenario") return "scenario summary and exact solution table";
  return {};
}

inline CommandOutput run_command(const std::string& name, const ExperimentConfig& cfg, unsigned jobs = 1)
{
  if (name == "verify-gradients") return cmd_verify_gradients(cfg);
  if (name == "check-conditions") return cmd_check_conditions(cfg);
  if (name == "rate-experiment") return cmd_rate_experiment(cfg, jobs);
  if (name == "print-scenario") return cmd_print_scenario(cfg);
  throw Error(ErrorKind::invalid_argument, "unknown command '" + name + "'");
}

} // namespace polyreg

#endif
