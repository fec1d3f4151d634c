#pragma once

// Resolvent kernel K of the stationary equation: Khat = 1/(c - alpha|xi| +
// eps*eta^2).  Two independent constructions are provided: the spectral one
// (kernel_field / convolve_kernel) and the real-space t-integral
// representation (kernel_quadrature), which cross-validate each other up to
// one global constant.

#include <vector>

#include "bozk/params.hpp"
#include "bozk/spectral.hpp"

namespace bozk {

struct KernelSpec {
  Params params;

  explicit KernelSpec(const Params& q) : params(q) {
    CanonicalMap map = canonicalize(q);  // throws outside the positive regime
    canon_ = map.canonical;
  }

  // symbol on the canonical branch: c + |alpha||xi| + eta^2 > 0
  double symbol(double kx, double ky) const {
    return canon_.c - canon_.alpha * std::abs(kx) + ky * ky;
  }
  const Params& canonical() const { return canon_; }

 private:
  Params canon_;
};

// Grid sampling of the (periodized) kernel.  The defining spectrum carries
// 1/symbol scaled by 1/(dx*dy), so that to_spectrum(K)*dx*dy recovers Khat
// and discrete convolution sum K(x-z) g(z) dxdy approximates K*g.
inline Field kernel_field(const KernelSpec& spec, const Grid2D& g) {
  Spectrum s(g);
  const double scale = 1.0 / (g.dx() * g.dy());
  for (int jx = 0; jx < g.nx; ++jx)
    for (int jy = 0; jy < g.ny; ++jy) {
      // checkerboard sign = exact half-period shift, centering K at x=y=0
      double sgn = (g.sx(jx) + g.sy(jy)) % 2 ? -1.0 : 1.0;
      s.at(jx, jy) = sgn * scale / spec.symbol(g.kx(jx), g.ky(jy));
    }
  return to_field(s);
}

// w = K * g, evaluated as the spectral solve (c - alpha H d_x - eps d_y^2) w = g.
inline Field convolve_kernel(const Field& g, const KernelSpec& spec) {
  Spectrum s = to_spectrum(g);
  const Grid2D& gr = g.grid;
  apply_real_multiplier(s, [&](int jx, int jy) {
    return 1.0 / spec.symbol(gr.kx(jx), gr.ky(jy));
  });
  return to_field(s);
}

// t-integral representation evaluated with the log substitution t = e^s on
// s in [-30, 30] and doubling refinement; returns the integral WITHOUT the
// unknown global constant.
inline double kernel_quadrature(double x, double y, const Params& q,
                                double tol = 1e-10) {
  if (x == 0.0 && y == 0.0)
    throw contract_error("kernel_quadrature: (0,0) is the kernel singularity");
  if (!(tol > 0.0)) throw contract_error("kernel_quadrature: tol must be > 0");
  KernelSpec spec(q);
  const double c = spec.canonical().c;
  const double a = std::abs(spec.canonical().alpha);

  auto integrand = [&](double s) {
    double t = std::exp(s);
    double expo = -(c * t + y * y / (4.0 * t));
    if (expo < -745.0) return 0.0;  // underflow guard
    return a * std::sqrt(t) / (a * a * t * t + x * x) * std::exp(expo) * t;
  };

  const double s0 = -30.0, s1 = 30.0;
  long n = 128;
  double h = (s1 - s0) / n;
  double prev = 0.0;
  detail::KahanSum ks;
  ks.add(0.5 * (integrand(s0) + integrand(s1)));
  for (long i = 1; i < n; ++i) ks.add(integrand(s0 + i * h));
  prev = ks.value() * h;
  for (int level = 0; level < 16; ++level) {
    detail::KahanSum mid;
    for (long i = 0; i < n; ++i) mid.add(integrand(s0 + (i + 0.5) * h));
    double cur = 0.5 * prev + mid.value() * 0.5 * h;
    n *= 2;
    h *= 0.5;
    if (std::abs(cur - prev) <= tol * std::abs(cur) && level > 1) return cur;
    prev = cur;
  }
  throw numeric_error("kernel_quadrature: no convergence within budget");
}

// Least-squares line y = slope*x + intercept.
inline std::pair<double, double> linear_fit(const std::vector<double>& xs,
                                            const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw contract_error("linear_fit: need at least two points");
  double n = double(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

struct KernelDecayFit {
  double slope_y_exp = 0.0;  // d/d|y| of log ||K(.,y)||_{L1x}; expect -sqrt(c)
  double slope_x_alg = 0.0;  // log-log slope of K(x,0); expect about -2
};

// Fit windows exclude the near field (|x|,|y| < 2) and the wrap-contaminated
// outer part of the box.
inline KernelDecayFit kernel_decay_fit(const KernelSpec& spec,
                                       const Grid2D& g) {
  Field K = kernel_field(spec, g);

  std::vector<double> ys, logl1;
  for (int iy = 0; iy < g.ny; ++iy) {
    double y = g.y(iy);
    if (y < 2.0 || y > 0.5 * g.ly) continue;
    double l1 = 0.0;
    for (int ix = 0; ix < g.nx; ++ix) l1 += std::abs(K.at(ix, iy));
    l1 *= g.dx();
    if (l1 <= 0.0) continue;
    ys.push_back(y);
    logl1.push_back(std::log(l1));
  }
  if (ys.size() < 10)
    throw contract_error("kernel_decay_fit: transverse window too small");

  std::vector<double> lxs, logk;
  const int iy0 = g.ny / 2;  // y = 0 row
  for (int ix = 0; ix < g.nx; ++ix) {
    double x = g.x(ix);
    if (x < 2.0 || x > 0.5 * g.lx) continue;
    double v = K.at(ix, iy0);
    if (v <= 0.0) continue;
    lxs.push_back(std::log(x));
    logk.push_back(std::log(v));
  }
  if (lxs.size() < 10)
    throw contract_error("kernel_decay_fit: propagation window too small");

  KernelDecayFit fit;
  fit.slope_y_exp = linear_fit(ys, logl1).first;
  fit.slope_x_alg = linear_fit(lxs, logk).first;
  return fit;
}

}  // namespace bozk
