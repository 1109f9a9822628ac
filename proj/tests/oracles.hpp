#pragma once

// Independent reference computations used to derive expected values.
// Nothing here goes through the Farey recursion of the library.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "lipschitz/curves.hpp"
#include "lipschitz/errors.hpp"
#include "lipschitz/torus_teich.hpp"

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

struct BigMat {
  Big a, b, c, d;
  BigMat operator*(const BigMat& n) const {
    return {a * n.a + b * n.c, a * n.b + b * n.d, c * n.a + d * n.c, c * n.b + d * n.d};
  }
};

// Lower Christoffel word of slope n/q as a letter string over {a, b}:
// letter i is b exactly when floor(i n / (q + n)) steps up.
inline std::vector<char> christoffel(long long n, long long q) {
  std::vector<char> w;
  const long long len = n + q;
  for (long long i = 1; i <= len; ++i) {
    w.push_back((i * n) / len > ((i - 1) * n) / len ? 'b' : 'a');
  }
  return w;
}

// |trace| of the slope p/q in the representation
// A = [[x, 1], [-1, 0]], B = [[0, s], [-1/s, y]], s + 1/s = -z,
// with B replaced by its inverse for negative p.
inline Big slope_trace(double x, double y, double z, long long p, long long q) {
  const Big bx = x, by = y, bz = z;
  const Big s = (-bz + sqrt(bz * bz - 4)) / 2;
  const BigMat A{bx, 1, -1, 0};
  const BigMat B{0, s, -1 / s, by};
  const BigMat Binv{by, -s, 1 / s, 0};
  BigMat m{1, 0, 0, 1};
  for (char ch : christoffel(p < 0 ? -p : p, q)) m = m * (ch == 'a' ? A : (p < 0 ? Binv : B));
  return abs(m.a + m.d);
}

inline double slope_length(double x, double y, double z, long long p, long long q) {
  const Big t = slope_trace(x, y, z, p, q);
  return static_cast<double>(2 * acosh(t / 2));
}

// Brute-force count of canonical slopes with max(|p|,|q|) <= Q.
inline long long count_slopes(long long Q) {
  long long n = 0;
  for (long long p = -Q; p <= Q; ++p) {
    for (long long q = 0; q <= Q; ++q) {
      if (std::gcd(p < 0 ? -p : p, q) != 1) continue;
      if (q == 0 && p != 1) continue;
      ++n;
    }
  }
  return n;
}

// Brute-force truncated d_L through the matrix oracle.
inline double brute_dl(const lipschitz::MarkovPoint& from, const lipschitz::MarkovPoint& to,
                       long long Q) {
  double best = -1e300;
  for (long long q = 0; q <= Q; ++q) {
    for (long long p = -Q; p <= Q; ++p) {
      if (std::gcd(p < 0 ? -p : p, q) != 1 || (q == 0 && p != 1)) continue;
      const double lx = slope_length(from.x(), from.y(), from.z(), p, q);
      const double ly = slope_length(to.x(), to.y(), to.z(), p, q);
      best = std::max(best, std::log(ly / lx));
    }
  }
  return best;
}

// A random point: chart coordinates in a box, random branch, then a short
// random word in the twists.
inline lipschitz::MarkovPoint random_point(std::mt19937_64& rng, int max_moves = 3) {
  std::uniform_real_distribution<double> uv(-1.5, 3.0);
  for (;;) {
    const double u = uv(rng), v = uv(rng);
    const auto branch = rng() % 2 ? lipschitz::Branch::Plus : lipschitz::Branch::Minus;
    try {
      auto x = lipschitz::point_from_chart(u, v, branch);
      const int moves = static_cast<int>(rng() % static_cast<unsigned>(max_moves + 1));
      const lipschitz::MCGMatrix gens[4] = {{1, 1, 0, 1}, {1, -1, 0, 1}, {1, 0, 1, 1}, {1, 0, -1, 1}};
      for (int i = 0; i < moves; ++i) x = lipschitz::act_on_point(gens[rng() % 4], x);
      return x;
    } catch (const lipschitz::ChartDomainError&) {
    }
  }
}

inline lipschitz::MCGMatrix random_matrix(std::mt19937_64& rng, int max_len = 6) {
  const lipschitz::MCGMatrix gens[5] = {
      {1, 1, 0, 1}, {1, -1, 0, 1}, {1, 0, 1, 1}, {1, 0, -1, 1}, {0, -1, 1, 0}};
  lipschitz::MCGMatrix m = lipschitz::MCGMatrix::identity();
  const int len = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_len));
  for (int i = 0; i < len; ++i) m = m * gens[rng() % 5];
  return m;
}

inline lipschitz::Slope random_slope(std::mt19937_64& rng, long long Q) {
  std::uniform_int_distribution<long long> d(-Q, Q);
  for (;;) {
    const long long p = d(rng), q = d(rng);
    if ((p != 0 || q != 0) && std::gcd(p < 0 ? -p : p, q < 0 ? -q : q) == 1) {
      return lipschitz::Slope(p, q);
    }
  }
}

}  // namespace oracle
