#pragma once

// Simple closed curves on the once-punctured torus and the action of
// SL(2,Z) on them.
//
// Conventions: the curve of slope p/q has homology class (p, q), where 1/0 is
// the "vertical" basis curve and 0/1 the "horizontal" one.  A matrix
// [[a, b], [c, d]] acts on column vectors, (p, q) -> (ap + bq, cp + dq), and
// the image is re-canonicalized.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lipschitz {

using Int = std::int64_t;

struct Vec2 {
  Int p = 0;
  Int q = 0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

class Slope {
 public:
  // Throws InvalidInput unless gcd(|p|,|q|) = 1.  Any sign is accepted and
  // canonicalized to q > 0 (or p = 1 when q = 0).
  Slope(Int p, Int q);

  // Accepts an arbitrary nonzero vector and divides out its content.
  static Slope from_vector(Int p, Int q);
  static Slope parse(std::string_view text);  // "p/q"

  Int p() const { return p_; }
  Int q() const { return q_; }
  Vec2 vec() const { return {p_, q_}; }
  double value() const;  // p/q, +inf for 1/0
  std::string str() const;

  friend bool operator==(const Slope&, const Slope&) = default;
  // Canonical order: by |p|, then |q|, then positive p before negative p.
  friend std::strong_ordering operator<=>(const Slope& a, const Slope& b);

 private:
  struct Trusted {};
  Slope(Int p, Int q, Trusted) : p_(p), q_(q) {}
  Int p_;
  Int q_;
};

Int intersection_number(const Slope& s1, const Slope& s2);

// All canonical slopes with max(|p|, |q|) <= Q in canonical order.
std::vector<Slope> enumerate_slopes(Int Q);

class MCGMatrix {
 public:
  MCGMatrix(Int a, Int b, Int c, Int d);  // throws InvalidInput unless ad-bc = 1
  static MCGMatrix identity() { return {1, 0, 0, 1}; }
  static MCGMatrix parse(std::string_view text);  // "a,b,c,d"

  Int a() const { return a_; }
  Int b() const { return b_; }
  Int c() const { return c_; }
  Int d() const { return d_; }
  Int trace() const { return a_ + d_; }

  MCGMatrix inverse() const { return {d_, -b_, -c_, a_}; }
  MCGMatrix pow(Int n) const;
  Vec2 apply(Vec2 v) const;  // throws std::overflow_error
  bool is_plus_minus_identity() const;
  std::string str() const;

  friend MCGMatrix operator*(const MCGMatrix& m, const MCGMatrix& n);
  friend bool operator==(const MCGMatrix&, const MCGMatrix&) = default;

 private:
  Int a_, b_, c_, d_;
};

Slope apply_class(const MCGMatrix& m, const Slope& s);

enum class NTTag { Periodic, Reducible, Anosov };

std::string to_string(NTTag tag);

struct NTType {
  NTTag tag = NTTag::Periodic;
  int order = 0;                          // Periodic: order in SL(2,Z)
  std::optional<Slope> invariant_slope;   // Reducible
  double dilatation = 1.0;                // Anosov: spectral radius
  double stable_slope = 0.0;              // Anosov: eigen-slope contracted by M
  double unstable_slope = 0.0;            // Anosov: eigen-slope expanded by M
};

NTType classify_matrix(const MCGMatrix& m);

// Checked integer helpers shared by the other modules.
Int checked_mul(Int a, Int b);
Int checked_add(Int a, Int b);

}  // namespace lipschitz
