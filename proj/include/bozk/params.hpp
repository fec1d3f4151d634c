#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "bozk/spectral.hpp"

namespace bozk {

// Model tuple of u_t + u^p u_x + alpha*H u_xx + eps*u_xyy = 0.
struct Params {
  double p = 1.0;
  double alpha = -1.0;
  int epsilon = 1;
  double c = 1.0;

  void validate() const {
    if (!(p > 0.0)) throw contract_error("Params: p must be positive");
    if (alpha == 0.0) throw contract_error("Params: alpha must be nonzero");
    if (epsilon != 1 && epsilon != -1)
      throw contract_error("Params: epsilon must be +1 or -1");
    if (c == 0.0) throw contract_error("Params: c must be nonzero");
  }
};

// p written as k/m with m odd, k and m coprime.  Signed powers u^p for u of
// either sign only make sense with this representation (odd-root semantics).
struct RationalExp {
  long k = 0;
  long m = 1;
};

inline std::optional<RationalExp> rational_exponent(double p) {
  for (long m = 1; m <= 99; m += 2) {
    double km = p * double(m);
    long k = std::lround(km);
    if (k > 0 && std::abs(km - double(k)) < 1e-9 * std::max(1.0, km)) {
      if (std::gcd(k, m) == 1) return RationalExp{k, m};
      return std::nullopt;  // reducible means the true denominator is even
    }
  }
  return std::nullopt;
}

inline RationalExp require_rational_exponent(double p) {
  auto r = rational_exponent(p);
  if (!r) {
    std::ostringstream os;
    os << "p = " << p << " is not representable as k/m with m odd; "
       << "signed powers are undefined";
    throw contract_error(os.str());
  }
  return *r;
}

// x^(num/m) with odd-root semantics: sign(x)^num * |x|^(num/m).
inline double signed_pow(double x, long num, long m) {
  if (x == 0.0) return 0.0;
  double mag = (m == 1) ? std::pow(std::abs(x), double(num))
                        : std::pow(std::abs(x), double(num) / double(m));
  return (num % 2 != 0 && x < 0.0) ? -mag : mag;
}

// Pointwise x^(p + shift) where p = k/m; shift in {0, 1, 2} covers u^p,
// u^{p+1}, u^{p+2}.
inline Field signed_pow_field(const Field& f, const RationalExp& r, int shift) {
  const long num = r.k + shift * r.m;
  Field out(f.grid);
  if (r.m == 1 && num >= 1 && num <= 8) {
    // small integer exponents: repeated multiplication
    for (std::size_t i = 0; i < f.v.size(); ++i) {
      double x = f.v[i], acc = x;
      for (long j = 1; j < num; ++j) acc *= x;
      out.v[i] = acc;
    }
    return out;
  }
  for (std::size_t i = 0; i < f.v.size(); ++i)
    out.v[i] = signed_pow(f.v[i], num, r.m);
  return out;
}

// The suite canonicalizes to the alpha<0, c>0, eps=+1 branch.  A tuple in
// the mirrored existence regime (eps=-1, alpha>0, c<0) maps onto it through
// x -> -x, u -> -u, (alpha, eps, c) -> (-alpha, -eps, -c); the profile map
// phi -> -phi(-x, y) only closes the nonlinearity sign for odd k.
struct CanonicalMap {
  Params canonical;
  bool negate = false;   // u -> -u
  bool mirror_x = false; // x -> -x
  std::string description = "identity";
};

inline bool in_existence_regime(const Params& q) {
  return q.alpha * q.epsilon < 0.0 && q.c * q.alpha < 0.0 && q.p < 4.0;
}

inline CanonicalMap canonicalize(const Params& q) {
  q.validate();
  CanonicalMap map;
  map.canonical = q;
  if (q.epsilon == 1 && q.alpha < 0.0 && q.c > 0.0) return map;
  if (q.epsilon == -1 && q.alpha > 0.0 && q.c < 0.0) {
    auto r = require_rational_exponent(q.p);
    if (r.k % 2 == 0) {
      throw regime_error(
          "mirrored regime (eps=-1, alpha>0, c<0) with even-numerator p: the "
          "u -> -u map does not close; no canonical form is available");
    }
    map.canonical = Params{q.p, -q.alpha, +1, -q.c};
    map.negate = true;
    map.mirror_x = true;
    map.description = "(x,u,alpha,eps,c) -> (-x,-u,-alpha,-eps,-c)";
    return map;
  }
  std::ostringstream os;
  os << "parameters (p=" << q.p << ", alpha=" << q.alpha
     << ", eps=" << q.epsilon << ", c=" << q.c
     << ") have no canonical positive-symbol form";
  throw regime_error(os.str());
}

inline Field apply_profile_map(const Field& f, const CanonicalMap& map) {
  Field out = map.mirror_x ? reflect_x(f) : f;
  if (map.negate)
    for (double& x : out.v) x = -x;
  return out;
}

}  // namespace bozk
