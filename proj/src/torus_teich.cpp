#include "lipschitz/torus_teich.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lipschitz/errors.hpp"

namespace lipschitz {

namespace {

const double kLogSwitchLog = std::log(TraceValue::kLogSwitch);

Int det(const Vec2& u, const Vec2& v) { return u.p * v.q - u.q * v.p; }
Vec2 operator+(const Vec2& u, const Vec2& v) { return {u.p + v.p, u.q + v.q}; }
Vec2 operator-(const Vec2& u, const Vec2& v) { return {u.p - v.p, u.q - v.q}; }
Vec2 operator-(const Vec2& u) { return {-u.p, -u.q}; }
Int sup_norm(const Vec2& v) { return std::max(v.p < 0 ? -v.p : v.p, v.q < 0 ? -v.q : v.q); }
int sign(Int v) { return (v > 0) - (v < 0); }

// Trace of the canonical vector (p, q), q >= 0, at a reduced triple, by
// Stern-Brocot descent from the base triangle {0/1, 1/0, +-1/1}.
TraceValue descend(const std::array<double, 3>& r, Vec2 target) {
  const TraceValue tx = TraceValue::plain(r[0]);
  const TraceValue ty = TraceValue::plain(r[1]);
  if (target.q == 0) return ty;
  if (target.p == 0) return tx;
  Vec2 u{0, 1}, v{target.p > 0 ? 1 : -1, 0};
  TraceValue tu = tx, tv = ty;
  Vec2 m = u + v;
  TraceValue tm = target.p > 0 ? TraceValue::plain(r[2])
                               : far_vertex(tx, ty, TraceValue::plain(r[2]));
  while (!(m == target)) {
    if (sign(det(m, target)) == sign(det(m, u))) {
      TraceValue next = far_vertex(tu, tm, tv);
      v = m;
      tv = tm;
      m = u + v;
      tm = next;
    } else {
      TraceValue next = far_vertex(tm, tv, tu);
      u = m;
      tu = tm;
      m = u + v;
      tm = next;
    }
  }
  return tm;
}

struct ExploreFrame {
  Vec2 a, b;  // Farey edge; the already-known opposite vertex is a + b
  TraceValue ta, tb, tc;
};

// Walks the Farey tree away from the reduced triangle.  `prune(frame, d)`
// may cut the subtree beyond an edge before its far vertex is evaluated.
template <class Prune, class Visit, class Stop>
void walk_from_reduced(const MarkovPoint& x, Prune&& prune, Visit&& visit, Stop&& stop) {
  const MCGMatrix& f = x.frame();
  const Vec2 vx{f.b(), f.d()};
  const Vec2 vy{f.a(), f.c()};
  const Vec2 vz = vx + vy;
  const TraceValue tx = TraceValue::plain(x.reduced()[0]);
  const TraceValue ty = TraceValue::plain(x.reduced()[1]);
  const TraceValue tz = TraceValue::plain(x.reduced()[2]);
  visit(vx, tx);
  visit(vy, ty);
  visit(vz, tz);

  std::vector<ExploreFrame> stack;
  stack.push_back({vx, vy, tx, ty, tz});
  stack.push_back({vz, -vy, tz, ty, tx});
  stack.push_back({vz, -vx, tz, tx, ty});
  while (!stack.empty()) {
    ExploreFrame fr = stack.back();
    stack.pop_back();
    if (prune(fr)) continue;
    const Vec2 d = fr.a - fr.b;
    const TraceValue td = far_vertex(fr.ta, fr.tb, fr.tc);
    if (stop(td)) continue;
    visit(d, td);
    stack.push_back({fr.a, -d, fr.ta, td, fr.tb});
    stack.push_back({d, fr.b, td, fr.tb, fr.ta});
  }
}

}  // namespace

void AnalysisConfig::validate() const {
  std::vector<std::string> bad;
  if (!(delta0 > 0)) bad.push_back("delta0 must be positive");
  if (slope_budget < 1) bad.push_back("slope budget must be at least 1");
  if (!(tolerance > 0)) bad.push_back("tolerance must be positive");
  if (!(thin_epsilon > 0)) bad.push_back("thin_epsilon must be positive");
  if (!bad.empty()) {
    std::string msg = "invalid analysis config:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw InvalidInput(msg);
  }
}

TraceValue TraceValue::plain(double t) {
  if (t >= kLogSwitch) return from_log(std::log(t));
  TraceValue out;
  out.v_ = t;
  out.log_scale_ = false;
  return out;
}

TraceValue TraceValue::from_log(double log_t) {
  if (log_t < kLogSwitchLog) return plain(std::exp(log_t));
  TraceValue out;
  out.v_ = log_t;
  out.log_scale_ = true;
  return out;
}

double TraceValue::value() const { return log_scale_ ? std::exp(v_) : v_; }
double TraceValue::log_value() const { return log_scale_ ? v_ : std::log(v_); }

double TraceValue::length() const {
  if (!log_scale_) return length_from_trace(v_);
  // 2 log(t/2 + sqrt(t^2/4 - 1)); the correction term underflows for t > 1e100.
  return 2.0 * v_ + 2.0 * std::log1p(0.5 * (std::sqrt(1.0 - 4.0 * std::exp(-2.0 * v_)) - 1.0));
}

TraceValue far_vertex(const TraceValue& a, const TraceValue& b, const TraceValue& c) {
  if (!a.log_scale_ && !b.log_scale_ && !c.log_scale_) {
    return TraceValue::plain(a.v_ * b.v_ - c.v_);
  }
  const double s = a.log_value() + b.log_value();
  return TraceValue::from_log(s + std::log1p(-std::exp(c.log_value() - s)));
}

double length_from_trace(double t) {
  if (!(t > 2.0)) {
    std::ostringstream os;
    os << "trace " << t << " <= 2: no closed geodesic (degenerate structure)";
    throw DegenerateStructure(os.str());
  }
  if (std::isinf(t)) return TraceValue::plain(t).length();
  // 2 asinh(sinh(l/2)) keeps full relative accuracy as t -> 2.
  return 2.0 * std::asinh(0.5 * std::sqrt((t - 2.0) * (t + 2.0)));
}

MarkovPoint MarkovPoint::from_traces(double x, double y, double z) {
  const std::array<double, 3> in{x, y, z};
  static const char* names[3] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(in[i]) || !(in[i] > 2.0)) {
      std::ostringstream os;
      os << "trace coordinate " << names[i] << " = " << in[i] << " must be finite and > 2";
      throw InvalidInput(os.str());
    }
  }
  const double residual = std::abs(x * x + y * y + z * z - x * y * z) / (x * y * z);
  if (!(residual <= kRelationTolerance)) {
    std::ostringstream os;
    os << "Fricke relation x^2+y^2+z^2 = xyz violated: relative residual " << residual
       << " exceeds " << kRelationTolerance;
    throw InvalidInput(os.str());
  }

  // Exchange descent: replace the largest trace by the product of the other
  // two minus itself while that decreases it.
  std::array<Vec2, 3> v{Vec2{0, 1}, Vec2{1, 0}, Vec2{1, 1}};
  std::array<double, 3> t = in;
  for (int iter = 0; iter < 100000; ++iter) {
    const int i = static_cast<int>(std::max_element(t.begin(), t.end()) - t.begin());
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const double next = t[j] * t[k] - t[i];
    if (!(next < t[i])) break;
    const Vec2 sum = v[j] + v[k];
    v[i] = (sum == v[i] || sum == -v[i]) ? v[j] - v[k] : sum;
    t[i] = next;
  }

  // Arrange the terminal triangle as (vx, vy, vx + vy) with det[vy vx] = 1.
  Vec2 vx = v[0], vy = v[1];
  if (!(vx + vy == v[2] || vx + vy == -v[2])) vy = -vy;
  if (!(vx + vy == v[2])) {
    vx = -vx;
    vy = -vy;
  }
  std::array<double, 3> reduced{t[0], t[1], t[2]};
  if (det(vy, vx) != 1) {
    std::swap(vx, vy);
    std::swap(reduced[0], reduced[1]);
  }
  MCGMatrix frame(vy.p, vx.p, vy.q, vx.q);
  return MarkovPoint(in, reduced, frame);
}

double MarkovPoint::relation_residual() const {
  const double x = coords_[0], y = coords_[1], z = coords_[2];
  return std::abs(x * x + y * y + z * z - x * y * z) / (x * y * z);
}

TraceValue trace_value(const MarkovPoint& x, const Slope& s) {
  const Vec2 local = x.frame().inverse().apply(s.vec());
  const Slope canonical(local.p, local.q);
  return descend(x.reduced(), canonical.vec());
}

double trace_of_slope(const MarkovPoint& x, const Slope& s) { return trace_value(x, s).value(); }

double length_of_slope(const MarkovPoint& x, const Slope& s) {
  return trace_value(x, s).length();
}

MarkovPoint act_on_point(const MCGMatrix& m, const MarkovPoint& x) {
  MarkovPoint out(x.coords_, x.reduced_, m * x.frame_);
  out.coords_ = {trace_of_slope(out, Slope(0, 1)), trace_of_slope(out, Slope(1, 0)),
                 trace_of_slope(out, Slope(1, 1))};
  const double biggest = *std::max_element(out.coords_.begin(), out.coords_.end());
  if (biggest < 1e90 && !(out.relation_residual() <= MarkovPoint::kRelationTolerance)) {
    throw std::logic_error("act_on_point: Fricke relation residual " +
                           std::to_string(out.relation_residual()) + " exceeds tolerance");
  }
  return out;
}

Systole systole(const MarkovPoint& x, const AnalysisConfig& /*cfg*/) {
  const MCGMatrix& f = x.frame();
  const std::array<Slope, 3> slopes{Slope::from_vector(f.b(), f.d()),
                                    Slope::from_vector(f.a(), f.c()),
                                    Slope::from_vector(f.a() + f.b(), f.c() + f.d())};
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    const double ti = x.reduced()[i], tb = x.reduced()[best];
    if (ti < tb || (ti == tb && slopes[i] < slopes[best])) best = i;
  }
  return {slopes[best], length_from_trace(x.reduced()[best])};
}

MarkovPoint point_from_chart(double u, double v, Branch branch) {
  const double x = 2.0 + std::exp(u);
  const double y = 2.0 + std::exp(v);
  const double disc = x * x * y * y - 4.0 * (x * x + y * y);
  if (!(disc >= 0.0) || !std::isfinite(disc)) {
    std::ostringstream os;
    os << "chart point (" << u << ", " << v << ") outside the domain: discriminant " << disc;
    throw ChartDomainError(os.str());
  }
  const double plus = 0.5 * (x * y + std::sqrt(disc));
  // The roots multiply to x^2 + y^2; dividing avoids cancellation.
  const double z = branch == Branch::Plus ? plus : (x * x + y * y) / plus;
  return MarkovPoint::from_traces(x, y, z);
}

void visit_slopes_within(const MarkovPoint& x, Int budget,
                         const std::function<void(const Vec2&, const TraceValue&)>& visit) {
  auto prune = [budget](const ExploreFrame& fr) {
    // Vertices beyond the edge are alpha*a - beta*b with alpha, beta >= 1;
    // a coordinate where a and -b agree in sign only grows.
    Int bound = 0;
    const Int ap[2] = {fr.a.p, fr.a.q};
    const Int bp[2] = {fr.b.p, fr.b.q};
    for (int i = 0; i < 2; ++i) {
      if (ap[i] == 0 || bp[i] == 0 || (ap[i] > 0) != (bp[i] > 0)) {
        const Int diff = ap[i] - bp[i];
        bound = std::max(bound, diff < 0 ? -diff : diff);
      }
    }
    return bound > budget;
  };
  walk_from_reduced(
      x, prune,
      [&](const Vec2& d, const TraceValue& td) {
        if (sup_norm(d) <= budget) visit(d, td);
      },
      [](const TraceValue&) { return false; });
}

std::vector<std::pair<Slope, double>> short_slopes(const MarkovPoint& x, double max_length) {
  std::vector<std::pair<Slope, double>> out;
  if (!(max_length > 0)) return out;
  // Traces grow monotonically away from the reduced triangle.
  const TraceValue cutoff = TraceValue::plain(2.0 * std::cosh(0.5 * max_length));
  auto beyond = [&](const TraceValue& t) { return t.log_value() >= cutoff.log_value(); };
  walk_from_reduced(
      x, [](const ExploreFrame&) { return false; },
      [&](const Vec2& d, const TraceValue& td) {
        if (beyond(td)) return;
        const double len = td.length();
        if (len < max_length) out.emplace_back(Slope::from_vector(d.p, d.q), len);
      },
      beyond);
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) {
    return l.second != r.second ? l.second < r.second : l.first < r.first;
  });
  return out;
}

TraceValue TraceCache::trace(const Slope& s) const {
  {
    std::shared_lock lock(mutex_);
    if (auto it = table_.find(s); it != table_.end()) return it->second;
  }
  const TraceValue t = trace_value(point_, s);
  std::unique_lock lock(mutex_);
  table_.emplace(s, t);
  return t;
}

std::size_t TraceCache::size() const {
  std::shared_lock lock(mutex_);
  return table_.size();
}

}  // namespace lipschitz
