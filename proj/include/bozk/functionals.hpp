#pragma once

// Scalar functionals: conserved quantities F (mass) and E (energy), the
// action S = E + c*F, the variational pair I and J, the constrained
// functional K, the Z-norm, Pohojaev residuals and the stability curve d(c).

#include <array>
#include <functional>

#include <json.hpp>

#include "bozk/params.hpp"
#include "bozk/spectral.hpp"

namespace bozk {

struct FunctionalReport {
  double mass = 0.0;
  double energy = 0.0;
  double action = 0.0;
  double I = 0.0;
  double J = 0.0;
  double K_func = 0.0;
  double znorm = 0.0;
  Params params;
  std::string sign_map = "identity";
};

inline nlohmann::json params_to_json(const Params& q) {
  return {{"p", q.p}, {"alpha", q.alpha}, {"epsilon", q.epsilon}, {"c", q.c}};
}

inline Params params_from_json(const nlohmann::json& j) {
  Params q;
  q.p = j.at("p").get<double>();
  q.alpha = j.at("alpha").get<double>();
  q.epsilon = j.at("epsilon").get<int>();
  q.c = j.at("c").get<double>();
  return q;
}

inline nlohmann::json to_json(const FunctionalReport& r) {
  return {{"mass", r.mass},     {"energy", r.energy}, {"action", r.action},
          {"I", r.I},           {"J", r.J},           {"K", r.K_func},
          {"znorm", r.znorm},   {"params", params_to_json(r.params)},
          {"sign_map", r.sign_map}};
}

// F(u) = 1/2 int u^2
inline double mass(const Field& u) { return 0.5 * l2_sq(u); }

// int u^{p+2} with odd-root semantics for fractional p
inline double power_integral(const Field& u, const Params& q, int shift) {
  auto r = require_rational_exponent(q.p);
  return integrate(signed_pow_field(u, r, shift));
}

inline double j_functional(const Field& u, const Params& q) {
  return power_integral(u, q, 2);
}

// E(u) = 1/2 int (eps u_y^2 - alpha u H u_x - 2/((p+1)(p+2)) u^{p+2})
inline double energy(const Field& u, const Params& q) {
  q.validate();
  Spectrum s = to_spectrum(u);
  double e = 0.5 * (q.epsilon * dy_l2_sq(s) - q.alpha * dxhalf_l2_sq(s)) -
             j_functional(u, q) / ((q.p + 1.0) * (q.p + 2.0));
  if (!std::isfinite(e)) throw numeric_error("energy: non-finite result");
  return e;
}

inline double znorm_sq(const Field& u) {
  Spectrum s = to_spectrum(u);
  return 2.0 * mass(u) + dy_l2_sq(s) + dxhalf_l2_sq(s);
}

inline double znorm(const Field& u) { return std::sqrt(znorm_sq(u)); }

// All functionals in one pass.  I and K are evaluated on the canonical
// (alpha<0, c>0, eps=+1) branch; mass/energy/action on the original tuple.
inline FunctionalReport zk_functionals(const Field& phi, const Params& q,
                                       bool override_regime = false) {
  q.validate();
  FunctionalReport rep;
  rep.params = q;
  rep.mass = mass(phi);
  rep.energy = energy(phi, q);
  rep.action = rep.energy + q.c * rep.mass;
  rep.znorm = znorm(phi);

  CanonicalMap map;
  if (in_existence_regime(q)) {
    map = canonicalize(q);
  } else if (override_regime) {
    map.canonical = q;  // evaluate the canonical formulas with q as given
    map.description = "override: outside existence regime";
  } else {
    throw regime_error(
        "zk_functionals: parameters outside the existence regime "
        "(alpha*eps<0, c*alpha<0, p<4); pass override to evaluate anyway");
  }
  rep.sign_map = map.description;

  const Params& cq = map.canonical;
  Field cphi = apply_profile_map(phi, map);
  Spectrum cs = to_spectrum(cphi);
  double two_mass = 2.0 * mass(cphi);
  double hb = dxhalf_l2_sq(cs);
  double dy2 = dy_l2_sq(cs);
  rep.I = 0.5 * (cq.c * two_mass + (-cq.alpha) * hb + dy2);
  rep.J = j_functional(cphi, cq);
  rep.K_func = 0.5 * (cq.c * two_mass + dy2) -
               rep.J / ((cq.p + 1.0) * (cq.p + 2.0));
  return rep;
}

// Relative residuals of the five stationary-equation identities obtained by
// pairing with phi, x*phi_x and y*phi_y.  Each residual is normalized by the
// sum of its term magnitudes, so residuals are dimensionless.
inline std::array<double, 5> pohojaev_residuals(const Field& phi,
                                                const Params& q) {
  q.validate();
  if (phi.max_abs() == 0.0)
    throw contract_error("pohojaev_residuals: phi is identically zero");
  Spectrum s = to_spectrum(phi);
  const double q2 = l2_sq(phi);          // int phi^2
  const double hb = dxhalf_l2_sq(s);     // int phi H phi_x
  const double dy2 = dy_l2_sq(s);        // int phi_y^2
  const double pw = power_integral(phi, q, 2);  // int phi^{p+2}
  const double p = q.p, a = q.alpha, c = q.c, e = q.epsilon;

  auto rel = [](std::initializer_list<double> terms) {
    double num = 0.0, den = 0.0;
    for (double t : terms) {
      num += t;
      den += std::abs(t);
    }
    return std::abs(num) / den;
  };

  return {
      rel({-c * q2, a * hb, -e * dy2, pw / (p + 1.0)}),
      rel({c * q2, e * dy2, -2.0 * pw / ((p + 1.0) * (p + 2.0))}),
      rel({c * q2, -a * hb, -e * dy2, -2.0 * pw / ((p + 1.0) * (p + 2.0))}),
      rel({2.0 * p * c * q2, a * (4.0 - p) * hb}),
      rel({p * c * q2, e * (p - 4.0) * dy2}),
  };
}

// Mismatch of J(phi)/((p+1)(p+2)) = 4c/(4-p) * F(phi), relative to the
// larger side.
inline double mass_ratio_check(const Field& phi, const Params& q) {
  q.validate();
  if (q.p == 4.0)
    throw regime_error("mass_ratio_check: identity degenerates at p = 4");
  double lhs = j_functional(phi, q) / ((q.p + 1.0) * (q.p + 2.0));
  double rhs = 4.0 * q.c / (4.0 - q.p) * mass(phi);
  double den = std::max(std::abs(lhs), std::abs(rhs));
  if (den == 0.0) return 0.0;
  return std::abs(lhs - rhs) / den;
}

// d(c) = E + c*F along the solitary-wave branch; solve_fn must produce the
// converged profile for the given parameter tuple.
inline std::vector<std::pair<double, double>> d_of_c_curve(
    const Params& base, const std::vector<double>& c_values,
    const std::function<Field(const Params&)>& solve_fn) {
  std::vector<std::pair<double, double>> out;
  out.reserve(c_values.size());
  for (double c : c_values) {
    if (!(c > 0.0)) throw contract_error("d_of_c_curve: speeds must be positive");
    Params q = base;
    q.c = c;
    Field phi;
    try {
      phi = solve_fn(q);
    } catch (const std::exception& ex) {
      std::ostringstream os;
      os << "d_of_c_curve: solve failed at c = " << c << ": " << ex.what();
      throw numeric_error(os.str());
    }
    double d = energy(phi, q) + c * mass(phi);
    out.emplace_back(c, d);
  }
  return out;
}

}  // namespace bozk
