#pragma once

// Thurston's asymmetric metric on the punctured-torus Teichmuller space,
// estimated from below by the largest log length ratio over a finite set of
// simple closed curves, plus measured laminations as weighted slopes.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lipschitz/curves.hpp"
#include "lipschitz/torus_teich.hpp"

namespace lipschitz {

// Lengths at one point of every slope with max(|p|,|q|) <= budget, stored
// densely by canonical (p, q).
class SlopeLengthTable {
 public:
  SlopeLengthTable(const MarkovPoint& x, Int budget);

  Int budget() const { return budget_; }
  bool contains(const Slope& s) const;
  double at(const Slope& s) const;  // throws std::out_of_range outside the budget

  // Raw access for the estimator loops: index of canonical (p, q).
  std::size_t index(Int p, Int q) const {
    return static_cast<std::size_t>(q) * static_cast<std::size_t>(2 * budget_ + 1) +
           static_cast<std::size_t>(p + budget_);
  }
  const std::vector<double>& data() const { return lengths_; }

 private:
  Int budget_;
  std::vector<double> lengths_;  // NaN where (p, q) is not a canonical slope
};

struct DLReport {
  double value = 0.0;
  Slope argmax_slope{0, 1};
  Int budget_used = 0;
  std::vector<std::pair<Int, double>> convergence;  // (budget, value), budgets 1,2,4,..,Q
};

// max over enumerate_slopes(Q) of log(l_Y(s) / l_X(s)); a lower bound for
// d_L(X, Y).  Ties go to the smallest slope in canonical order.
DLReport dl_estimate(const MarkovPoint& x, const MarkovPoint& y, Int budget);
DLReport dl_between(const SlopeLengthTable& from, const SlopeLengthTable& to);

// Same estimator over an explicit curve set.
double dl_over_slopes(const MarkovPoint& x, const MarkovPoint& y, std::span<const Slope> slopes);

// A measured lamination on the torus: either a weighted simple closed curve
// or an irrational direction (mu, 1) with a weight.
class TorusLamination {
 public:
  static TorusLamination rational(const Slope& s, double weight);
  // Infinite slope means the curve 1/0.
  static TorusLamination irrational(double slope, double weight);

  bool is_rational() const { return curve_.has_value(); }
  const std::optional<Slope>& curve() const { return curve_; }
  double slope() const { return slope_; }
  double weight() const { return weight_; }

 private:
  TorusLamination(std::optional<Slope> curve, double slope, double weight)
      : curve_(curve), slope_(slope), weight_(weight) {}
  std::optional<Slope> curve_;
  double slope_;
  double weight_;
};

double lamination_intersection(const TorusLamination& lam, const Slope& s);

// Rational: weight * curve length.  Irrational: limit of
// weight * l(p_k/q_k) / q_k over continued-fraction convergents, stopped when
// the relative change drops below tol.  Throws ConvergenceError otherwise.
double lamination_length(const MarkovPoint& x, const TorusLamination& lam, double tol);

// log(l_Y(lam) / l_X(lam)), a lower bound for d_L(X, Y).
double ratio_for_lamination(const MarkovPoint& x, const MarkovPoint& y,
                            const TorusLamination& lam, double tol);

struct SandwichSample {
  int m = 0;
  Slope alpha{0, 1};
  double length = 0.0;        // l_{phi^m X}(alpha)
  double intersection = 0.0;  // i(phi^m lambda_2, alpha) with the fitted weight
  double residual = 0.0;      // length - intersection
};

struct SandwichReport {
  double weight = 0.0;    // fitted weight of the expanding lamination
  double fitted_C = 0.0;  // largest residual over the non-parallel samples
  double min_residual = 0.0;
  bool within_bounds = false;  // min_residual >= -tol
  int max_m = 0;
  double expanding_slope = 0.0;
  std::vector<SandwichSample> residuals;
  // Curves nearly parallel to the expanding lamination; their residuals are
  // dominated by their own length and are excluded from the fit.
  std::vector<Slope> near_parallel;
};

// Samples l_{phi^m X}(alpha) for 0 <= m <= m_max against the intersection
// with phi^m of the expanding lamination, whose weight is the least-squares
// fit over the iterates m >= m_max / 2.  The lower bound of the sandwich
// is a property of points on the invariant axis; elsewhere residuals take
// both signs.  Throws PreconditionViolation for non-Anosov classes or
// m_max < 2.
SandwichReport sandwich_check(const MarkovPoint& x, const MCGMatrix& m,
                              std::span<const Slope> alphas, int m_max, double tol = 1e-6);

}  // namespace lipschitz
