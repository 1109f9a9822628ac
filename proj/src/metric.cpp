#include "lipschitz/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "lipschitz/errors.hpp"

namespace lipschitz {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Convergent {
  Int p;
  Int q;
};

// Continued-fraction convergents of a finite real.  Denominators past ~1e8
// resolve the double itself rather than the direction it approximates.
std::vector<Convergent> convergents(double mu, Int max_denominator) {
  std::vector<Convergent> out;
  long double x = mu;
  Int p_prev = 1, q_prev = 0;
  Int a0 = static_cast<Int>(std::floor(x));
  Int p = a0, q = 1;
  out.push_back({p, q});
  long double frac = x - static_cast<long double>(a0);
  while (frac > 0 && out.size() < 90) {
    x = 1.0L / frac;
    if (x > 1e12L) break;
    const Int a = static_cast<Int>(std::floor(x));
    frac = x - static_cast<long double>(a);
    Int pn, qn;
    if (__builtin_mul_overflow(a, p, &pn) || __builtin_add_overflow(pn, p_prev, &pn) ||
        __builtin_mul_overflow(a, q, &qn) || __builtin_add_overflow(qn, q_prev, &qn)) {
      break;
    }
    if (qn > max_denominator) break;
    p_prev = p;
    q_prev = q;
    p = pn;
    q = qn;
    out.push_back({p, q});
  }
  return out;
}

}  // namespace

SlopeLengthTable::SlopeLengthTable(const MarkovPoint& x, Int budget) : budget_(budget) {
  if (budget < 1) throw InvalidInput("slope budget must be at least 1");
  lengths_.assign(static_cast<std::size_t>(budget + 1) * static_cast<std::size_t>(2 * budget + 1),
                  kNaN);
  visit_slopes_within(x, budget, [this](const Vec2& d, const TraceValue& t) {
    Int p = d.p, q = d.q;
    if (q < 0 || (q == 0 && p < 0)) {
      p = -p;
      q = -q;
    }
    lengths_[index(p, q)] = t.length();
  });
}

bool SlopeLengthTable::contains(const Slope& s) const {
  return std::max(s.p() < 0 ? -s.p() : s.p(), s.q()) <= budget_;
}

double SlopeLengthTable::at(const Slope& s) const {
  if (!contains(s)) throw std::out_of_range("slope " + s.str() + " outside table budget");
  return lengths_[index(s.p(), s.q())];
}

DLReport dl_between(const SlopeLengthTable& from, const SlopeLengthTable& to) {
  if (from.budget() != to.budget()) throw InvalidInput("length tables use different budgets");
  const Int budget = from.budget();
  const auto& lx = from.data();
  const auto& ly = to.data();

  std::vector<double> level_best(static_cast<std::size_t>(budget + 1),
                                 -std::numeric_limits<double>::infinity());
  DLReport report;
  report.budget_used = budget;
  report.value = -std::numeric_limits<double>::infinity();
  bool have = false;
  for (Int q = 0; q <= budget; ++q) {
    for (Int p = -budget; p <= budget; ++p) {
      const std::size_t k = from.index(p, q);
      if (std::isnan(lx[k])) continue;
      const double r = std::log(ly[k] / lx[k]);
      const Int level = std::max(p < 0 ? -p : p, q);
      level_best[static_cast<std::size_t>(level)] =
          std::max(level_best[static_cast<std::size_t>(level)], r);
      if (!have || r > report.value) {
        report.value = r;
        report.argmax_slope = Slope(p, q);
        have = true;
      } else if (r == report.value) {
        const Slope s(p, q);
        if (s < report.argmax_slope) report.argmax_slope = s;
      }
    }
  }
  double running = -std::numeric_limits<double>::infinity();
  std::vector<double> prefix(level_best.size());
  for (std::size_t i = 0; i < level_best.size(); ++i) {
    running = std::max(running, level_best[i]);
    prefix[i] = running;
  }
  for (Int b = 1; b < budget; b *= 2) report.convergence.emplace_back(b, prefix[b]);
  report.convergence.emplace_back(budget, prefix[static_cast<std::size_t>(budget)]);
  return report;
}

DLReport dl_estimate(const MarkovPoint& x, const MarkovPoint& y, Int budget) {
  return dl_between(SlopeLengthTable(x, budget), SlopeLengthTable(y, budget));
}

double dl_over_slopes(const MarkovPoint& x, const MarkovPoint& y, std::span<const Slope> slopes) {
  if (slopes.empty()) throw InvalidInput("empty curve set");
  TraceCache cx(x), cy(y);
  double best = -std::numeric_limits<double>::infinity();
  for (const Slope& s : slopes) best = std::max(best, std::log(cy.length(s) / cx.length(s)));
  return best;
}

TorusLamination TorusLamination::rational(const Slope& s, double weight) {
  if (!(weight > 0) || !std::isfinite(weight)) {
    throw InvalidInput("lamination weight must be positive and finite");
  }
  return TorusLamination(s, s.value(), weight);
}

TorusLamination TorusLamination::irrational(double slope, double weight) {
  if (std::isinf(slope)) return rational(Slope(1, 0), weight);
  if (std::isnan(slope)) throw InvalidInput("lamination slope is NaN");
  if (!(weight > 0) || !std::isfinite(weight)) {
    throw InvalidInput("lamination weight must be positive and finite");
  }
  return TorusLamination(std::nullopt, slope, weight);
}

double lamination_intersection(const TorusLamination& lam, const Slope& s) {
  if (lam.is_rational()) {
    return lam.weight() * static_cast<double>(intersection_number(*lam.curve(), s));
  }
  return lam.weight() *
         std::abs(static_cast<double>(s.p()) - lam.slope() * static_cast<double>(s.q()));
}

double lamination_length(const MarkovPoint& x, const TorusLamination& lam, double tol) {
  if (!(tol > 0)) throw InvalidInput("tolerance must be positive");
  if (lam.is_rational()) return lam.weight() * length_of_slope(x, *lam.curve());

  const auto conv = convergents(lam.slope(), Int{1} << 27);
  // Early convergents can coincide by accident (1/1 and 2/1 for the golden
  // ratio at a symmetric point), so demand two quiet steps past q = 8.
  double prev = kNaN;
  int quiet = 0;
  for (const Convergent& c : conv) {
    const double value =
        lam.weight() * length_of_slope(x, Slope(c.p, c.q)) / static_cast<double>(c.q);
    if (!std::isnan(prev) && std::abs(value - prev) < tol * std::abs(value)) {
      if (++quiet >= 2 && c.q >= 8) return value;
    } else {
      quiet = 0;
    }
    prev = value;
  }
  // A terminating expansion means the direction is rational after all.
  if (!conv.empty() && lam.slope() == static_cast<double>(conv.back().p) /
                                          static_cast<double>(conv.back().q)) {
    return prev;
  }
  throw ConvergenceError("lamination length did not converge to relative tolerance " +
                         std::to_string(tol) + "; tolerance too tight");
}

double ratio_for_lamination(const MarkovPoint& x, const MarkovPoint& y,
                            const TorusLamination& lam, double tol) {
  const double lx = lamination_length(x, lam, tol);
  const double ly = lamination_length(y, lam, tol);
  if (!(lx > 0) || !(ly > 0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw DegenerateStructure("degenerate lamination length");
  }
  return std::log(ly / lx);
}

SandwichReport sandwich_check(const MarkovPoint& x, const MCGMatrix& m,
                              std::span<const Slope> alphas, int m_max, double tol) {
  const NTType nt = classify_matrix(m);
  if (nt.tag != NTTag::Anosov) {
    throw PreconditionViolation("sandwich check needs an Anosov class, got " + to_string(nt.tag));
  }
  if (m_max < 2) throw PreconditionViolation("sandwich check needs m_max >= 2");
  if (alphas.empty()) throw InvalidInput("sandwich check needs at least one curve");

  SandwichReport report;
  report.max_m = m_max;
  report.expanding_slope = nt.unstable_slope;
  const double k = nt.dilatation;
  const TorusLamination unit = TorusLamination::irrational(nt.unstable_slope, 1.0);

  std::vector<bool> parallel(alphas.size(), false);
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    const Slope& s = alphas[a];
    const Int size = std::max(s.p() < 0 ? -s.p() : s.p(), s.q());
    if (size >= 8 && lamination_intersection(unit, s) * static_cast<double>(size) < 1.0) {
      parallel[a] = true;
      report.near_parallel.push_back(s);
    }
  }

  MarkovPoint point = x;
  double kpow = 1.0;
  std::vector<SandwichSample> samples;
  for (int step = 0; step <= m_max; ++step) {
    for (const Slope& s : alphas) {
      SandwichSample smp;
      smp.m = step;
      smp.alpha = s;
      smp.length = length_of_slope(point, s);
      smp.intersection = kpow * lamination_intersection(unit, s);  // unit weight for now
      samples.push_back(smp);
    }
    point = act_on_point(m, point);
    kpow *= k;
  }

  // Least-squares weight for length ~ w * i over the late iterates only.
  // The early residuals are the additive part of the sandwich; fitting them
  // too would tilt w and leave residuals growing like K^m.
  const int tail_from = (m_max + 1) / 2;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (parallel[i % alphas.size()] || samples[i].m < tail_from) continue;
    num += samples[i].length * samples[i].intersection;
    den += samples[i].intersection * samples[i].intersection;
  }
  if (!(den > 0)) throw DegenerateStructure("all sandwich curves are parallel to the lamination");
  report.weight = num / den;

  report.fitted_C = 0.0;
  report.min_residual = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].intersection *= report.weight;
    samples[i].residual = samples[i].length - samples[i].intersection;
    if (parallel[i % alphas.size()]) continue;
    report.fitted_C = std::max(report.fitted_C, samples[i].residual);
    report.min_residual = std::min(report.min_residual, samples[i].residual);
  }
  report.within_bounds = report.min_residual >= -tol;
  report.residuals = std::move(samples);
  return report;
}

}  // namespace lipschitz
