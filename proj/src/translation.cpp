#include "lipschitz/translation.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <thread>
#include <tuple>

#include "lipschitz/errors.hpp"

namespace lipschitz {

namespace {

constexpr double kChartBox = 40.0;       // |u|, |v| beyond this are clamped and penalized
constexpr double kPenaltySlope = 10.0;   // charge per unit of chart distance outside the domain

double discriminant(double u, double v) {
  const double x = 2.0 + std::exp(u), y = 2.0 + std::exp(v);
  return x * x * y * y - 4.0 * (x * x + y * y);
}

// Smallest t >= 0 with (u + t, v + t) inside the chart domain.  The
// discriminant is increasing along the diagonal, so bisection is safe.
double diagonal_entry(double u, double v) {
  if (discriminant(u, v) >= 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (discriminant(u + hi, v + hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (discriminant(u + mid, v + mid) < 0.0 ? lo : hi) = mid;
  }
  return hi;
}

struct ChartValue {
  double value;
  Branch branch;
};

ChartValue chart_objective(const MCGMatrix& m, double u, double v, Int budget) {
  double penalty = 0.0;
  const double cu = std::clamp(u, -kChartBox, kChartBox);
  const double cv = std::clamp(v, -kChartBox, kChartBox);
  penalty += std::abs(u - cu) + std::abs(v - cv);
  const double t = diagonal_entry(cu, cv);
  penalty += t;
  ChartValue best{std::numeric_limits<double>::infinity(), Branch::Minus};
  for (Branch b : {Branch::Minus, Branch::Plus}) {
    const double d = displacement(point_from_chart(cu + t, cv + t, b), m, budget);
    if (d < best.value) best = {d, b};
  }
  best.value += kPenaltySlope * penalty;
  return best;
}

struct SimplexRun {
  double value = std::numeric_limits<double>::infinity();
  double u = 0.0, v = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct ObjectiveData {
  const MCGMatrix* m;
  Int budget;
  int evaluations;
};

double gsl_objective(const gsl_vector* p, void* raw) {
  auto* data = static_cast<ObjectiveData*>(raw);
  ++data->evaluations;
  return chart_objective(*data->m, gsl_vector_get(p, 0), gsl_vector_get(p, 1), data->budget)
      .value;
}

SimplexRun run_simplex(const MCGMatrix& m, double u0, double v0, double step, Int budget,
                       double tolerance, int max_evaluations) {
  static const bool quiet = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)quiet;
  ObjectiveData data{&m, budget, 0};
  gsl_multimin_function fn{&gsl_objective, 2, &data};

  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(2),
                                                            &gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> ss(gsl_vector_alloc(2),
                                                             &gsl_vector_free);
  gsl_vector_set(x.get(), 0, u0);
  gsl_vector_set(x.get(), 1, v0);
  gsl_vector_set_all(ss.get(), step);
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2),
      &gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), ss.get());

  SimplexRun run;
  while (data.evaluations < max_evaluations) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), tolerance) ==
        GSL_SUCCESS) {
      run.converged = true;
      break;
    }
  }
  run.value = s->fval;
  run.u = gsl_vector_get(s->x, 0);
  run.v = gsl_vector_get(s->x, 1);
  run.evaluations = data.evaluations;
  return run;
}

// Restart the simplex from its own best vertex until a run stops improving.
SimplexRun polish(const MCGMatrix& m, SimplexRun run, double step, Int budget,
                  double tolerance, int max_evaluations) {
  int spent = 0;
  for (int round = 0; round < 6 && spent < max_evaluations; ++round) {
    SimplexRun next =
        run_simplex(m, run.u, run.v, step, budget, tolerance, max_evaluations - spent);
    spent += next.evaluations;
    const bool improved = next.value < run.value - 1e-12;
    if (next.value <= run.value) {
      run.value = next.value;
      run.u = next.u;
      run.v = next.v;
    }
    run.converged = next.converged;
    if (!improved) break;
    step = std::max(step * 0.25, 10.0 * tolerance);
  }
  run.evaluations += spent;
  return run;
}

}  // namespace

DLReport displacement_report(const MarkovPoint& x, const MCGMatrix& m, Int budget) {
  return dl_estimate(x, act_on_point(m, x), budget);
}

double displacement(const MarkovPoint& x, const MCGMatrix& m, Int budget) {
  return displacement_report(x, m, budget).value;
}

void TDistOptions::validate() const {
  if (restarts < 1) throw InvalidInput("restarts must be at least 1");
  if (search_budget < 1 || budget < 1) throw InvalidInput("slope budgets must be at least 1");
  if (!(tolerance > 0)) throw InvalidInput("tolerance must be positive");
  if (max_evaluations < 10) throw InvalidInput("max_evaluations must be at least 10");
  if (!(initial_step > 0)) throw InvalidInput("initial step must be positive");
  if (threads < 1) throw InvalidInput("threads must be at least 1");
}

TDistReport minimize_displacement(const MCGMatrix& m, const TDistOptions& opts) {
  opts.validate();
  TDistReport report;
  report.seed = opts.seed;
  report.restarts = opts.restarts;
  report.budget = opts.budget;

  // Starts: a shuffled coarse grid over the chart, jittered by the seed.
  std::mt19937_64 rng(opts.seed);
  std::vector<std::pair<double, double>> grid;
  for (double u : {0.0, 1.0, 2.0, 3.0}) {
    for (double v : {0.0, 1.0, 2.0, 3.0}) grid.emplace_back(u, v);
  }
  std::shuffle(grid.begin(), grid.end(), rng);
  std::uniform_real_distribution<double> jitter(-0.25, 0.25);
  std::vector<std::pair<double, double>> starts;
  for (int r = 0; r < opts.restarts; ++r) {
    const auto& g = grid[static_cast<std::size_t>(r) % grid.size()];
    const double du = jitter(rng), dv = jitter(rng);
    starts.emplace_back(g.first + du, g.second + dv);
  }

  std::vector<SimplexRun> runs(starts.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t r = begin; r < starts.size(); r += stride) {
      runs[r] = polish(m,
                       run_simplex(m, starts[r].first, starts[r].second, opts.initial_step,
                                   opts.search_budget, opts.tolerance, opts.max_evaluations),
                       opts.initial_step * 0.25, opts.search_budget, opts.tolerance,
                       opts.max_evaluations);
    }
  };
  if (opts.threads > 1) {
    std::vector<std::thread> pool;
    const auto n = static_cast<std::size_t>(opts.threads);
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work, t, n);
    for (auto& th : pool) th.join();
  } else {
    work(0, 1);
  }

  // Deterministic choice: lowest value, ties by chart coordinates.
  const SimplexRun* best = &runs.front();
  for (const SimplexRun& r : runs) {
    report.evaluations += r.evaluations;
    if (std::tie(r.value, r.u, r.v) < std::tie(best->value, best->u, best->v)) best = &r;
  }
  bool converged = best->converged;

  // Refine at the full budget.  Along the invariant axis of an Anosov class
  // the objective is flat, so this simplex may never shrink; the stage
  // counts as settled once it stops gaining more than the tolerance.
  SimplexRun final_run = *best;
  if (opts.budget != opts.search_budget) {
    final_run.value = chart_objective(m, best->u, best->v, opts.budget).value;
    final_run.evaluations = 0;
    const double start = final_run.value;
    final_run = polish(m, final_run, opts.initial_step * 0.05, opts.budget, opts.tolerance,
                       std::max(10, opts.max_evaluations / 5));
    report.evaluations += final_run.evaluations + 1;
    converged = converged && (final_run.converged || start - final_run.value <= opts.tolerance);
  }

  // Report a genuine point and its displacement, never a penalized value.
  const double cu = std::clamp(final_run.u, -kChartBox, kChartBox);
  const double cv = std::clamp(final_run.v, -kChartBox, kChartBox);
  const double t = diagonal_entry(cu, cv);
  const ChartValue cvalue = chart_objective(m, cu + t, cv + t, opts.budget);
  report.chart_u = cu + t;
  report.chart_v = cv + t;
  report.branch = cvalue.branch;
  report.argmin_point = point_from_chart(report.chart_u, report.chart_v, cvalue.branch);
  report.a_est = cvalue.value;
  report.converged = converged;
  return report;
}

MarkovPoint pinch_point(const Slope& s, double eps) {
  if (!(eps > 0) || !std::isfinite(eps)) throw InvalidInput("pinch epsilon must be positive");
  // Complete s to a basis: P = [[p, r], [q, t]] with p t - r q = 1.
  const Int p = s.p(), q = s.q();
  Int r = 0, t = 1;
  {
    // Extended Euclid on (p, q): find r, t with p t - q r = 1.
    Int old_r = p, cur_r = q, old_s = 1, cur_s = 0, old_t = 0, cur_t = 1;
    while (cur_r != 0) {
      const Int k = old_r / cur_r;
      std::tie(old_r, cur_r) = std::make_pair(cur_r, old_r - k * cur_r);
      std::tie(old_s, cur_s) = std::make_pair(cur_s, old_s - k * cur_s);
      std::tie(old_t, cur_t) = std::make_pair(cur_t, old_t - k * cur_t);
    }
    // old_s * p + old_t * q = old_r = +-1
    t = old_s * old_r;
    r = -old_t * old_r;
  }
  const MCGMatrix frame(p, r, q, t);
  const double y = 2.0 + eps;
  const double side = y / std::sqrt(eps);
  return act_on_point(frame, MarkovPoint::from_traces(side, y, side));
}

PinchReport pinch_scan(const MCGMatrix& m, std::span<const double> eps_grid, Int budget) {
  const NTType nt = classify_matrix(m);
  if (nt.tag != NTTag::Reducible) {
    throw PreconditionViolation("pinch scan needs a reducible class, got " + to_string(nt.tag));
  }
  if (eps_grid.empty()) throw InvalidInput("empty epsilon grid");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0)) throw InvalidInput("pinch epsilons must be positive");
    if (i > 0 && !(eps_grid[i] < eps_grid[i - 1])) {
      throw InvalidInput("pinch epsilons must be strictly decreasing");
    }
  }
  PinchReport report;
  report.pinched = *nt.invariant_slope;
  for (double eps : eps_grid) {
    const MarkovPoint x = pinch_point(report.pinched, eps);
    report.samples.push_back({eps, displacement(x, m, budget), systole(x).length});
  }
  // Geometric-decay (Aitken) extrapolation through the last three samples.
  const std::size_t n = report.samples.size();
  report.limit_estimate = report.samples.back().displacement;
  if (n >= 3) {
    const double d0 = report.samples[n - 3].displacement;
    const double d1 = report.samples[n - 2].displacement;
    const double d2 = report.samples[n - 1].displacement;
    const double denom = (d2 - d1) - (d1 - d0);
    const double ratio = (d2 - d1) / (d1 - d0);
    if (std::abs(denom) > 1e-300 && std::isfinite(ratio) && ratio > 0 && ratio < 1) {
      report.limit_estimate = d2 - (d2 - d1) * (d2 - d1) / denom;
    }
  }
  return report;
}

std::vector<OrbitDefect> orbit_audit(const MCGMatrix& m, const MarkovPoint& x, int k_max,
                                     Int budget) {
  if (k_max < 1) throw InvalidInput("k_max must be at least 1");
  std::vector<SlopeLengthTable> tables;
  tables.reserve(static_cast<std::size_t>(2 * k_max + 1));
  MarkovPoint start = act_on_point(m.pow(-k_max), x);
  for (int i = -k_max; i <= k_max; ++i) {
    tables.emplace_back(start, budget);
    start = act_on_point(m, start);
  }
  const double step = displacement(x, m, budget);
  std::vector<OrbitDefect> out;
  for (int i = -k_max; i <= k_max; ++i) {
    for (int j = i; j <= k_max; ++j) {
      const double d = i == j ? 0.0
                              : dl_between(tables[static_cast<std::size_t>(i + k_max)],
                                           tables[static_cast<std::size_t>(j + k_max)])
                                    .value;
      out.push_back({i, j, static_cast<double>(j - i) * step - d});
    }
  }
  return out;
}

std::string to_string(ActionType t) {
  switch (t) {
    case ActionType::Elliptic: return "Elliptic";
    case ActionType::Parabolic: return "Parabolic";
    case ActionType::Hyperbolic: return "Hyperbolic";
    case ActionType::PseudoHyperbolic: return "PseudoHyperbolic";
  }
  return "?";
}

ActionTypeReport classify_action(const MCGMatrix& m, const ClassifyOptions& opts) {
  ActionTypeReport report;
  report.nt = classify_matrix(m);
  switch (report.nt.tag) {
    case NTTag::Periodic: {
      report.type = ActionType::Elliptic;
      report.tdist = minimize_displacement(m, opts.tdist);
      report.fixed_point_displacement = report.tdist->a_est;
      break;
    }
    case NTTag::Reducible: {
      report.type = ActionType::Parabolic;
      report.pinch = pinch_scan(m, opts.pinch_grid, opts.tdist.budget);
      break;
    }
    case NTTag::Anosov: {
      report.type = ActionType::Hyperbolic;
      report.tdist = minimize_displacement(m, opts.tdist);
      report.orbit = orbit_audit(m, report.tdist->argmin_point, opts.orbit_k_max,
                                 opts.orbit_budget);
      break;
    }
  }
  return report;
}

bool systole_inequality_check(const MarkovPoint& x, const MCGMatrix& m,
                              const AnalysisConfig& cfg) {
  cfg.validate();
  const NTType nt = classify_matrix(m);
  if (nt.tag == NTTag::Reducible) {
    throw PreconditionViolation("systole inequality needs an irreducible class");
  }
  if (m.is_plus_minus_identity()) {
    throw PreconditionViolation("systole inequality needs a nontrivial action");
  }
  const double lipschitz = std::exp(displacement(x, m, cfg.slope_budget));
  return lipschitz * (1.0 + cfg.tolerance) >= cfg.delta0 / systole(x, cfg).length;
}

}  // namespace lipschitz
