#include "lipschitz/curves.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lipschitz/errors.hpp"

namespace lipschitz {

namespace {

Int parse_int(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  Int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidInput("not an integer: '" + std::string(s) + "'");
  }
  return value;
}

Int iabs(Int x) {
  if (x == std::numeric_limits<Int>::min()) throw std::overflow_error("integer overflow");
  return x < 0 ? -x : x;
}

}  // namespace

Int checked_mul(Int a, Int b) {
  Int r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("integer overflow");
  return r;
}

Int checked_add(Int a, Int b) {
  Int r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("integer overflow");
  return r;
}

Slope::Slope(Int p, Int q) {
  if (p == 0 && q == 0) throw InvalidInput("slope 0/0 is not a curve");
  if (std::gcd(iabs(p), iabs(q)) != 1) {
    throw InvalidInput("slope " + std::to_string(p) + "/" + std::to_string(q) +
                       " is not reduced");
  }
  if (q < 0 || (q == 0 && p < 0)) {
    p = -p;
    q = -q;
  }
  p_ = p;
  q_ = q;
}

Slope Slope::from_vector(Int p, Int q) {
  if (p == 0 && q == 0) throw InvalidInput("zero vector is not a curve");
  Int g = std::gcd(iabs(p), iabs(q));
  return Slope(p / g, q / g);
}

Slope Slope::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    throw InvalidInput("slope must be written p/q: '" + std::string(text) + "'");
  }
  return Slope(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
}

double Slope::value() const {
  if (q_ == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(p_) / static_cast<double>(q_);
}

std::string Slope::str() const { return std::to_string(p_) + "/" + std::to_string(q_); }

std::strong_ordering operator<=>(const Slope& a, const Slope& b) {
  if (auto c = iabs(a.p_) <=> iabs(b.p_); c != 0) return c;
  if (auto c = a.q_ <=> b.q_; c != 0) return c;
  return (a.p_ < 0) <=> (b.p_ < 0);
}

Int intersection_number(const Slope& s1, const Slope& s2) {
  return iabs(checked_add(checked_mul(s1.p(), s2.q()), -checked_mul(s2.p(), s1.q())));
}

std::vector<Slope> enumerate_slopes(Int Q) {
  if (Q < 1) throw InvalidInput("slope budget must be at least 1");
  std::vector<Slope> out;
  out.emplace_back(1, 0);
  for (Int q = 1; q <= Q; ++q) {
    for (Int p = -Q; p <= Q; ++p) {
      if (std::gcd(iabs(p), q) == 1) out.emplace_back(p, q);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

MCGMatrix::MCGMatrix(Int a, Int b, Int c, Int d) : a_(a), b_(b), c_(c), d_(d) {
  Int det;
  try {
    det = checked_add(checked_mul(a, d), -checked_mul(b, c));
  } catch (const std::overflow_error&) {
    throw InvalidInput("matrix entries too large");
  }
  if (det != 1) {
    throw InvalidInput("matrix " + str() + " has determinant " + std::to_string(det) +
                       ", expected 1");
  }
}

MCGMatrix MCGMatrix::parse(std::string_view text) {
  Int v[4];
  for (int i = 0; i < 4; ++i) {
    auto comma = text.find(',');
    if ((i < 3) != (comma != std::string_view::npos)) {
      throw InvalidInput("matrix must be written a,b,c,d");
    }
    v[i] = parse_int(text.substr(0, comma));
    text = i < 3 ? text.substr(comma + 1) : std::string_view{};
  }
  return MCGMatrix(v[0], v[1], v[2], v[3]);
}

MCGMatrix operator*(const MCGMatrix& m, const MCGMatrix& n) {
  auto dot = [](Int x1, Int y1, Int x2, Int y2) {
    return checked_add(checked_mul(x1, y1), checked_mul(x2, y2));
  };
  return MCGMatrix(dot(m.a_, n.a_, m.b_, n.c_), dot(m.a_, n.b_, m.b_, n.d_),
                   dot(m.c_, n.a_, m.d_, n.c_), dot(m.c_, n.b_, m.d_, n.d_));
}

MCGMatrix MCGMatrix::pow(Int n) const {
  MCGMatrix base = n < 0 ? inverse() : *this;
  MCGMatrix result = identity();
  for (Int k = n < 0 ? -n : n; k > 0; k >>= 1) {
    if (k & 1) result = result * base;
    if (k > 1) base = base * base;
  }
  return result;
}

Vec2 MCGMatrix::apply(Vec2 v) const {
  return {checked_add(checked_mul(a_, v.p), checked_mul(b_, v.q)),
          checked_add(checked_mul(c_, v.p), checked_mul(d_, v.q))};
}

bool MCGMatrix::is_plus_minus_identity() const {
  return b_ == 0 && c_ == 0 && a_ == d_;
}

std::string MCGMatrix::str() const {
  return "[[" + std::to_string(a_) + "," + std::to_string(b_) + "],[" + std::to_string(c_) +
         "," + std::to_string(d_) + "]]";
}

Slope apply_class(const MCGMatrix& m, const Slope& s) {
  Vec2 v = m.apply(s.vec());
  return Slope(v.p, v.q);
}

std::string to_string(NTTag tag) {
  switch (tag) {
    case NTTag::Periodic: return "Periodic";
    case NTTag::Reducible: return "Reducible";
    case NTTag::Anosov: return "Anosov";
  }
  return "?";
}

NTType classify_matrix(const MCGMatrix& m) {
  NTType out;
  const Int tr = m.trace();
  if (m.is_plus_minus_identity()) {
    out.tag = NTTag::Periodic;
    out.order = m.a() == 1 ? 1 : 2;
    return out;
  }
  if (tr > -2 && tr < 2) {
    out.tag = NTTag::Periodic;
    out.order = tr == 0 ? 4 : (tr == 1 ? 6 : 3);
    return out;
  }
  if (tr == 2 || tr == -2) {
    // M - sI has rank one; its kernel is the fixed curve.
    const Int s = tr / 2;
    Vec2 v = (m.b() != 0 || m.a() != s) ? Vec2{m.b(), s - m.a()} : Vec2{s - m.d(), m.c()};
    out.tag = NTTag::Reducible;
    out.invariant_slope = Slope::from_vector(v.p, v.q);
    return out;
  }
  out.tag = NTTag::Anosov;
  const double t = static_cast<double>(tr);
  const double root = std::sqrt(t * t - 4.0);
  // Larger-magnitude eigenvalue without cancellation, then its reciprocal.
  const double big = (t > 0 ? t + root : t - root) / 2.0;
  const double small = 1.0 / big;
  out.dilatation = std::abs(big);
  auto eigen_slope = [&](double e) {
    // (a - e) p + b q = 0  or  c p + (d - e) q = 0; use the better conditioned row.
    const double a = static_cast<double>(m.a()), b = static_cast<double>(m.b());
    const double c = static_cast<double>(m.c()), d = static_cast<double>(m.d());
    if (std::abs(e - a) >= std::abs(c)) return b / (e - a);
    return (e - d) / c;
  };
  out.unstable_slope = eigen_slope(big);
  out.stable_slope = eigen_slope(small);
  return out;
}

}  // namespace lipschitz
