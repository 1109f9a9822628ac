#pragma once

// Translation distance a(phi) = inf_X d_L(X, phi X) for torus mapping
// classes, the four action types, pinching scans for reducible classes and
// additivity audits along orbits.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipschitz/curves.hpp"
#include "lipschitz/metric.hpp"
#include "lipschitz/torus_teich.hpp"

namespace lipschitz {

// d_L(X, M X) truncated to slopes with max(|p|,|q|) <= budget.
double displacement(const MarkovPoint& x, const MCGMatrix& m, Int budget);
DLReport displacement_report(const MarkovPoint& x, const MCGMatrix& m, Int budget);

struct TDistOptions {
  int restarts = 8;
  std::uint64_t seed = 1;
  Int search_budget = 64;  // slope budget while the simplices move
  Int budget = 200;        // slope budget for the final polish and the reported value
  double tolerance = 1e-6; // simplex size at which a run counts as converged
  int max_evaluations = 1500;  // per simplex run
  double initial_step = 0.5;
  int threads = 1;

  void validate() const;  // throws InvalidInput
};

struct TDistReport {
  double a_est = 0.0;
  MarkovPoint argmin_point = MarkovPoint::from_traces(3.0, 3.0, 3.0);
  double chart_u = 0.0, chart_v = 0.0;
  Branch branch = Branch::Minus;
  int restarts = 0;
  int evaluations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  Int budget = 0;
};

// Multistart Nelder-Mead over the (u, v) chart, both z-branches per chart
// point.  Chart points with negative discriminant are slid diagonally onto
// the domain boundary and charged a linear penalty, which keeps the
// objective continuous near boundary minimizers such as the square torus.
TDistReport minimize_displacement(const MCGMatrix& m, const TDistOptions& opts = {});

struct PinchSample {
  double epsilon;
  double displacement;
  double systole;
};

struct PinchReport {
  Slope pinched{1, 0};
  std::vector<PinchSample> samples;
  double limit_estimate = 0.0;
};

// The point whose curve `s` has trace 2 + eps and whose two neighbours
// across s have equal traces.
MarkovPoint pinch_point(const Slope& s, double eps);

// Throws PreconditionViolation unless M is reducible; InvalidInput unless
// the grid is positive and strictly decreasing.
PinchReport pinch_scan(const MCGMatrix& m, std::span<const double> eps_grid, Int budget = 200);

struct OrbitDefect {
  int i, j;
  double defect;  // (j - i) * displacement - d_L(phi^i X, phi^j X)
};

std::vector<OrbitDefect> orbit_audit(const MCGMatrix& m, const MarkovPoint& x, int k_max,
                                     Int budget);

enum class ActionType { Elliptic, Parabolic, Hyperbolic, PseudoHyperbolic };
std::string to_string(ActionType t);

struct ActionTypeReport {
  ActionType type = ActionType::Elliptic;
  NTType nt;
  std::optional<TDistReport> tdist;        // Elliptic and Hyperbolic
  std::optional<PinchReport> pinch;        // Parabolic
  std::vector<OrbitDefect> orbit;          // Hyperbolic
  double fixed_point_displacement = 0.0;   // Elliptic
};

struct ClassifyOptions {
  TDistOptions tdist;
  std::vector<double> pinch_grid{1e-1, 1e-2, 1e-3, 1e-4};
  int orbit_k_max = 4;
  Int orbit_budget = 400;
};

// Periodic -> Elliptic, Reducible -> Parabolic, Anosov -> Hyperbolic.
// PseudoHyperbolic never occurs on the punctured torus.
ActionTypeReport classify_action(const MCGMatrix& m, const ClassifyOptions& opts = {});

// exp(displacement) * (1 + tolerance) >= delta0 / systole.  Throws
// PreconditionViolation for reducible classes and for +-identity.
bool systole_inequality_check(const MarkovPoint& x, const MCGMatrix& m,
                              const AnalysisConfig& cfg = {});

}  // namespace lipschitz
