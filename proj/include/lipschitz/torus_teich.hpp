#pragma once

// Teichmuller space of the once-punctured torus in Fricke trace coordinates.
//
// A point is a triple (x, y, z) of traces of the curves 0/1, 1/0 and 1/1,
// all > 2, on the surface x^2 + y^2 + z^2 = xyz.  Internally every point is
// kept in a normal form: a reduced triple (the three shortest curves, where
// no exchange move z -> xy - z decreases a coordinate) together with an
// exact SL(2,Z) frame locating that triangle.  All length evaluations walk
// the Farey tree outward from the reduced triangle, where traces only grow,
// so no evaluation suffers cancellation no matter how far the point has
// been pushed by the mapping class group.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lipschitz/curves.hpp"

namespace lipschitz {

// Below this length two distinct simple closed geodesics are disjoint.
inline const double kCollarDelta0 = 2.0 * std::asinh(1.0);

struct AnalysisConfig {
  double delta0 = kCollarDelta0;
  Int slope_budget = 200;
  double tolerance = 1e-6;
  double thin_epsilon = 0.1;

  void validate() const;  // throws InvalidInput
};

// A trace value that switches to log scale once it outgrows double range
// comfortably.  Plain values stay below kLogSwitch.
class TraceValue {
 public:
  static constexpr double kLogSwitch = 1e100;

  static TraceValue plain(double t);
  static TraceValue from_log(double log_t);

  bool is_log() const { return log_scale_; }
  double value() const;      // +inf when beyond double range
  double log_value() const;  // log(trace)
  double length() const;     // 2 arccosh(t/2); throws DegenerateStructure if t <= 2

  // a*b - c, the trace of the far vertex across a Farey edge.
  friend TraceValue far_vertex(const TraceValue& a, const TraceValue& b, const TraceValue& c);

 private:
  double v_ = 2.0;
  bool log_scale_ = false;
};

double length_from_trace(double t);  // throws DegenerateStructure if t <= 2

class MarkovPoint {
 public:
  static constexpr double kRelationTolerance = 1e-9;

  // Validates x, y, z > 2 and the Fricke relation to kRelationTolerance
  // relative residual; throws InvalidInput naming the failed invariant.
  static MarkovPoint from_traces(double x, double y, double z);

  double x() const { return coords_[0]; }
  double y() const { return coords_[1]; }
  double z() const { return coords_[2]; }
  const std::array<double, 3>& coords() const { return coords_; }

  // Reduced triple (traces of 0/1, 1/0, 1/1 at the reduced point) and the
  // frame F with t_X(F s) = t_reduced(s).
  const std::array<double, 3>& reduced() const { return reduced_; }
  const MCGMatrix& frame() const { return frame_; }

  double relation_residual() const;  // |x^2+y^2+z^2-xyz| / xyz

 private:
  friend MarkovPoint act_on_point(const MCGMatrix& m, const MarkovPoint& x);
  MarkovPoint(std::array<double, 3> coords, std::array<double, 3> reduced, MCGMatrix frame)
      : coords_(coords), reduced_(reduced), frame_(frame) {}

  std::array<double, 3> coords_;
  std::array<double, 3> reduced_;
  MCGMatrix frame_;
};

TraceValue trace_value(const MarkovPoint& x, const Slope& s);
double trace_of_slope(const MarkovPoint& x, const Slope& s);  // +inf past double range
double length_of_slope(const MarkovPoint& x, const Slope& s);

// act(M, X) has t_{act(M,X)}(s) = t_X(M^{-1} s).
MarkovPoint act_on_point(const MCGMatrix& m, const MarkovPoint& x);

struct Systole {
  Slope slope;
  double length;
};

Systole systole(const MarkovPoint& x, const AnalysisConfig& cfg = {});

enum class Branch { Plus, Minus };

// x = 2 + e^u, y = 2 + e^v, z the chosen root of z^2 - xyz + x^2 + y^2 = 0.
// Throws ChartDomainError when the discriminant is negative.
MarkovPoint point_from_chart(double u, double v, Branch branch);

// Farey-tree walk from the reduced triangle.  The visitor sees every slope
// with max(|p|,|q|) <= budget exactly once, together with its trace.
void visit_slopes_within(const MarkovPoint& x, Int budget,
                         const std::function<void(const Vec2&, const TraceValue&)>& visit);

// Every slope of length strictly below max_length, shortest first.
std::vector<std::pair<Slope, double>> short_slopes(const MarkovPoint& x, double max_length);

// Memoized per-point trace lookups.  Concurrent readers share the table;
// insertion takes the exclusive lock.  Values do not depend on the order
// in which slopes are requested.
class TraceCache {
 public:
  explicit TraceCache(MarkovPoint point) : point_(std::move(point)) {}

  const MarkovPoint& point() const { return point_; }
  TraceValue trace(const Slope& s) const;
  double length(const Slope& s) const { return trace(s).length(); }
  std::size_t size() const;

 private:
  struct SlopeHash {
    std::size_t operator()(const Slope& s) const noexcept {
      return std::hash<Int>{}(s.p()) * 1000003u ^ std::hash<Int>{}(s.q());
    }
  };
  MarkovPoint point_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<Slope, TraceValue, SlopeHash> table_;
};

}  // namespace lipschitz
