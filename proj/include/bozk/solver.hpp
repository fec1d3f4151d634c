#pragma once

// Solitary-wave computation: regime classification, the stabilized
// Petviashvili fixed-point iteration for phi = (1/(p+1)) K * phi^{p+1},
// speed rescaling, Steiner symmetrization and the decay/symmetry
// diagnostics.

#include <optional>

#include "bozk/functionals.hpp"
#include "bozk/kernel.hpp"
#include "bozk/params.hpp"
#include "bozk/spectral.hpp"

namespace bozk {

enum class Verdict { Exists, NoSolitaryWave, Unknown };

struct Classification {
  Verdict verdict = Verdict::NoSolitaryWave;
  std::string matched_case;
};

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Exists: return "Exists";
    case Verdict::NoSolitaryWave: return "NoSolitaryWave";
    case Verdict::Unknown: return "Unknown";
  }
  return "?";
}

// Decision table over (eps, sign c, sign alpha, p vs 4).  Pure; allocates
// nothing.
inline Classification classify(const Params& q) {
  q.validate();
  if (q.alpha * q.epsilon < 0.0 && q.c * q.alpha < 0.0 && q.p < 4.0)
    return {Verdict::Exists, q.epsilon == 1 ? "(i)" : "(ii)"};
  if (q.p > 4.0) {
    if (q.epsilon == 1 && q.c < 0.0 && q.alpha < 0.0)
      return {Verdict::Unknown, "(iii)"};
    if (q.epsilon == -1 && q.c > 0.0 && q.alpha > 0.0)
      return {Verdict::Unknown, "(iv)"};
  }
  return {Verdict::NoSolitaryWave, q.p == 4.0 ? "p=4" : "none of (i)-(iv)"};
}

struct SolveOptions {
  double gamma = 0.0;  // 0 selects the default (p+1)/p
  double tol = 1e-8;
  int max_iter = 500;
  std::optional<Field> initial_guess;
  bool override_regime = false;
};

struct SolitaryWave {
  Field profile;
  Params params;
  int iterations = 0;
  bool converged = false;
  double eq_residual_inf = 0.0;
  FunctionalReport functional_report;
  std::array<double, 5> pohojaev{};
  std::vector<double> stabilizer_history;
  double boundary_contamination = 0.0;
  std::string sign_map = "identity";
};

namespace detail {

inline std::pair<int, int> argmax_abs(const Field& f) {
  const Grid2D& g = f.grid;
  int bi = 0, bj = 0;
  double best = -1.0;
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy)
      if (std::abs(f.at(ix, iy)) > best) {
        best = std::abs(f.at(ix, iy));
        bi = ix;
        bj = iy;
      }
  return {bi, bj};
}

inline double boundary_contamination(const Field& f) {
  const Grid2D& g = f.grid;
  double b = 0.0;
  for (int iy = 0; iy < g.ny; ++iy) b = std::max(b, std::abs(f.at(0, iy)));
  for (int ix = 0; ix < g.nx; ++ix) b = std::max(b, std::abs(f.at(ix, 0)));
  double m = f.max_abs();
  return m > 0.0 ? b / m : 0.0;
}

// sup-norm residual of (c - alpha H d_x - eps d_y^2) phi - phi^{p+1}/(p+1),
// normalized by max|phi|.
inline double equation_residual(const Field& phi, const Params& q) {
  const Grid2D& g = phi.grid;
  Spectrum s = to_spectrum(phi);
  auto r = require_rational_exponent(q.p);
  Field n = signed_pow_field(phi, r, 1);
  Spectrum ns = to_spectrum(n);
  const double pinv = 1.0 / (q.p + 1.0);
  for (int jx = 0; jx < g.nx; ++jx)
    for (int jy = 0; jy < g.ny; ++jy) {
      double sym = q.c - q.alpha * std::abs(g.kx(jx)) + q.epsilon * g.ky(jy) * g.ky(jy);
      s.at(jx, jy) = sym * s.at(jx, jy) - pinv * ns.at(jx, jy);
    }
  Field res = to_field(s);
  double m = phi.max_abs();
  return m > 0.0 ? res.max_abs() / m : res.max_abs();
}

// quadratic sub-sample peak offset from three samples, in grid units
inline double parabolic_offset(double a, double b, double c) {
  double den = a - 2.0 * b + c;
  if (den == 0.0) return 0.0;
  double d = 0.5 * (a - c) / den;
  return std::clamp(d, -0.5, 0.5);
}

}  // namespace detail

inline Field default_initial_guess(const Grid2D& g) {
  Field f(g);
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy) {
      double x = g.x(ix), y = g.y(iy);
      f.at(ix, iy) = std::exp(-(x * x + y * y) / 4.0);
    }
  return f;
}

inline SolitaryWave petviashvili_solve(const Params& q, const Grid2D& g,
                                       const SolveOptions& opts = {}) {
  q.validate();
  Classification cls = classify(q);
  if (cls.verdict != Verdict::Exists && !opts.override_regime) {
    std::ostringstream os;
    os << "petviashvili_solve: classification is " << verdict_name(cls.verdict)
       << " (" << cls.matched_case << "); pass override to run anyway";
    throw regime_error(os.str());
  }

  // Work on the canonical branch when one exists; override runs outside the
  // existence regime iterate the raw tuple (exploratory, no claims).
  CanonicalMap map;
  if (cls.verdict == Verdict::Exists) {
    map = canonicalize(q);
  } else {
    map.canonical = q;
    map.description = "override: raw parameters (exploratory)";
  }
  const Params& cq = map.canonical;
  auto rexp = require_rational_exponent(cq.p);
  const double gamma = opts.gamma > 0.0 ? opts.gamma : (cq.p + 1.0) / cq.p;

  Field phi = opts.initial_guess ? apply_profile_map(*opts.initial_guess, map)
                                 : default_initial_guess(g);
  if (!(phi.grid == g))
    throw contract_error("petviashvili_solve: initial guess grid mismatch");
  if (phi.max_abs() == 0.0)
    throw contract_error("petviashvili_solve: degenerate initial guess (M_0 undefined)");
  if (!(j_functional(phi, cq) > 0.0))
    throw contract_error("petviashvili_solve: initial guess needs J(guess) > 0");

  std::vector<double> symbol(g.size());
  for (int jx = 0; jx < g.nx; ++jx)
    for (int jy = 0; jy < g.ny; ++jy) {
      double s = cq.c - cq.alpha * std::abs(g.kx(jx)) +
                 cq.epsilon * g.ky(jy) * g.ky(jy);
      if (std::abs(s) < 1e-12)
        throw numeric_error("petviashvili_solve: singular linear symbol on grid");
      symbol[std::size_t(jx) * g.ny + jy] = s;
    }

  SolitaryWave w;
  w.params = q;
  w.sign_map = map.description;

  std::vector<cplx> phihat(g.size()), nhat(g.size()), work(g.size());
  {
    std::vector<cplx> tmp(phi.v.begin(), phi.v.end());
    fft_forward(g, tmp.data(), phihat.data());
  }

  const double pinv = 1.0 / (cq.p + 1.0);
  bool converged = false;
  int iters = 0;
  for (int n = 0; n < opts.max_iter; ++n) {
    Field nl = signed_pow_field(phi, rexp, 1);
    for (double& x : nl.v) x *= pinv;
    {
      std::vector<cplx> tmp(nl.v.begin(), nl.v.end());
      fft_forward(g, tmp.data(), nhat.data());
    }

    bozk::detail::KahanSum num, den;
    for (std::size_t i = 0; i < g.size(); ++i) {
      num.add(symbol[i] * std::norm(phihat[i]));
      den.add((std::conj(phihat[i]) * nhat[i]).real());
    }
    if (den.value() == 0.0)
      throw contract_error("petviashvili_solve: degenerate iterate (M undefined)");
    double M = num.value() / den.value();
    w.stabilizer_history.push_back(M);

    // residual of the current iterate
    for (std::size_t i = 0; i < g.size(); ++i)
      work[i] = symbol[i] * phihat[i] - nhat[i];
    std::vector<cplx> res(g.size());
    fft_inverse(g, work.data(), res.data());
    double rinf = 0.0;
    for (const cplx& z : res) rinf = std::max(rinf, std::abs(z.real()));
    double amp = phi.max_abs();
    rinf = amp > 0.0 ? rinf / amp : rinf;

    iters = n + 1;
    if (rinf <= opts.tol && std::abs(M - 1.0) <= 1e-8) {
      converged = true;
      break;
    }

    if (M <= 0.0 && std::floor(gamma) != gamma)
      throw numeric_error("petviashvili_solve: nonpositive stabilizer with fractional gamma");
    double mg = std::pow(M, gamma);
    for (std::size_t i = 0; i < g.size(); ++i)
      phihat[i] = mg * nhat[i] / symbol[i];
    std::vector<cplx> tmp(g.size());
    fft_inverse(g, phihat.data(), tmp.data());
    for (std::size_t i = 0; i < g.size(); ++i) phi.v[i] = tmp[i].real();
    if (!phi.all_finite())
      throw numeric_error("petviashvili_solve: iterate blew up");
  }

  // back to the requested frame, then center the peak at the origin
  phi = apply_profile_map(phi, map);
  auto [pi, pj] = detail::argmax_abs(phi);
  phi = circshift(phi, g.nx / 2 - pi, g.ny / 2 - pj);

  auto asym = [&](const Field& f) {
    double nrm = l2_norm(f);
    Field rx = reflect_x(f), ry = reflect_y(f);
    for (std::size_t i = 0; i < f.v.size(); ++i) {
      rx.v[i] = f.v[i] - rx.v[i];
      ry.v[i] = f.v[i] - ry.v[i];
    }
    return std::max(l2_norm(rx), l2_norm(ry)) / nrm;
  };
  if (asym(phi) > 1e-8) {
    const int cx = g.nx / 2, cy = g.ny / 2;
    auto av = [&](int dx2, int dy2) {
      return std::abs(phi.at((cx + dx2 + g.nx) % g.nx, (cy + dy2 + g.ny) % g.ny));
    };
    double ox = detail::parabolic_offset(av(-1, 0), av(0, 0), av(1, 0));
    double oy = detail::parabolic_offset(av(0, -1), av(0, 0), av(0, 1));
    if (ox != 0.0 || oy != 0.0)
      phi = fourier_shift(phi, -ox * g.dx(), -oy * g.dy());
  }

  w.profile = phi;
  w.iterations = iters;
  w.eq_residual_inf = detail::equation_residual(phi, q);
  double mlast = w.stabilizer_history.empty() ? 0.0 : w.stabilizer_history.back();
  w.converged = converged && w.eq_residual_inf <= opts.tol &&
                std::abs(mlast - 1.0) <= 1e-8;
  w.boundary_contamination = detail::boundary_contamination(phi);
  w.functional_report =
      zk_functionals(phi, q, /*override=*/cls.verdict != Verdict::Exists);
  w.pohojaev = pohojaev_residuals(phi, q);
  return w;
}

// phi_{c_new}(x, y) = r^{1/p} phi(r x, sqrt(r) y), r = c_new/c, evaluated by
// dense Fourier resummation (exact trigonometric interpolation of the
// periodic extension).
inline Field rescale_wave(const SolitaryWave& w, double c_new) {
  if (!(c_new > 0.0) || !(w.params.c > 0.0))
    throw contract_error("rescale_wave: speeds must be positive (canonical branch)");
  const Grid2D& g = w.profile.grid;
  const double r = c_new / w.params.c;
  const double ax = r, ay = std::sqrt(r);

  Spectrum s = to_spectrum(w.profile);

  if (r > 1.0) {
    // narrower wave: spectral support must fit below kmax/r after rescale
    bozk::detail::KahanSum tail, total;
    const double kxcut = std::abs(g.kx(g.nx / 2)) / ax;
    const double kycut = std::abs(g.ky(g.ny / 2)) / ay;
    for (int jx = 0; jx < g.nx; ++jx)
      for (int jy = 0; jy < g.ny; ++jy) {
        double e = std::norm(s.at(jx, jy));
        total.add(e);
        if (std::abs(g.kx(jx)) > kxcut || std::abs(g.ky(jy)) > kycut)
          tail.add(e);
      }
    if (tail.value() > 1e-10 * total.value())
      throw contract_error("rescale_wave: target speed too fast for this grid "
                           "(rescaled wave not resolvable)");
  }

  // The DFT's trigonometric interpolant reads
  //   phi(x, y) = (1/N) sum s(jx, jy) e^{i kx (x + lx)} e^{i ky (y + ly)},
  // so evaluation at stretched coordinates keeps the +lx/+ly offsets.
  // y pass: T(jx, iy) = sum_jy s(jx, jy) e^{i ky(jy) (ay*y(iy) + ly)}
  std::vector<cplx> phase_y(std::size_t(g.ny) * g.ny);
  for (int jy = 0; jy < g.ny; ++jy)
    for (int iy = 0; iy < g.ny; ++iy) {
      double arg = g.ky(jy) * (ay * g.y(iy) + g.ly);
      phase_y[std::size_t(jy) * g.ny + iy] =
          g.is_nyquist_y(jy) ? cplx(std::cos(arg), 0.0)
                             : std::exp(cplx(0.0, arg));
    }
  std::vector<cplx> T(g.size());
  for (int jx = 0; jx < g.nx; ++jx)
    for (int jy = 0; jy < g.ny; ++jy) {
      cplx v = s.at(jx, jy);
      if (v == cplx(0.0)) continue;
      const cplx* row = &phase_y[std::size_t(jy) * g.ny];
      cplx* out = &T[std::size_t(jx) * g.ny];
      for (int iy = 0; iy < g.ny; ++iy) out[iy] += v * row[iy];
    }

  // x pass: out(ix, iy) = Re sum_jx T(jx, iy) e^{i kx(jx) (ax*x(ix) + lx)}
  Field out(g);
  std::vector<cplx> phase_x(g.nx);
  const double amp = std::pow(r, 1.0 / w.params.p) / double(g.size());
  for (int ix = 0; ix < g.nx; ++ix) {
    for (int jx = 0; jx < g.nx; ++jx) {
      double arg = g.kx(jx) * (ax * g.x(ix) + g.lx);
      phase_x[jx] = g.is_nyquist_x(jx) ? cplx(std::cos(arg), 0.0)
                                       : std::exp(cplx(0.0, arg));
    }
    for (int iy = 0; iy < g.ny; ++iy) {
      cplx acc(0.0);
      for (int jx = 0; jx < g.nx; ++jx)
        acc += phase_x[jx] * T[std::size_t(jx) * g.ny + iy];
      out.at(ix, iy) = amp * acc.real();
    }
  }

  if (r < 1.0) {
    double bc = detail::boundary_contamination(out);
    if (bc > std::max(1e-3, 10.0 * w.boundary_contamination))
      throw contract_error("rescale_wave: target speed too slow for this box "
                           "(rescaled wave reaches the boundary)");
  }
  return out;
}

// Line-by-line symmetric-decreasing rearrangement of |f| about the chosen
// axis.  Sorted values go to positions ordered by distance from the center
// (ties: positive side first); the leftover boundary point takes the
// smallest value.  The multiset of |values| per line is preserved exactly.
inline Field steiner_symmetrize(const Field& f, Axis axis) {
  const Grid2D& g = f.grid;
  const int n = axis == Axis::x ? g.nx : g.ny;
  const int lines = axis == Axis::x ? g.ny : g.nx;
  std::vector<int> order;
  order.reserve(n);
  order.push_back(n / 2);
  for (int j = 1; j < n / 2; ++j) {
    order.push_back(n / 2 + j);
    order.push_back(n / 2 - j);
  }
  order.push_back(0);

  Field out(g);
  std::vector<double> buf(n);
  for (int l = 0; l < lines; ++l) {
    for (int i = 0; i < n; ++i)
      buf[i] = std::abs(axis == Axis::x ? f.at(i, l) : f.at(l, i));
    std::sort(buf.begin(), buf.end(), std::greater<double>());
    for (int i = 0; i < n; ++i) {
      if (axis == Axis::x)
        out.at(order[i], l) = buf[i];
      else
        out.at(l, order[i]) = buf[i];
    }
  }
  return out;
}

struct SymmetryReport {
  double x_asym = 0.0;
  double y_asym = 0.0;
};

inline SymmetryReport symmetry_report(const SolitaryWave& w) {
  const Field& f = w.profile;
  double nrm = l2_norm(f);
  Field rx = reflect_x(f), ry = reflect_y(f);
  for (std::size_t i = 0; i < f.v.size(); ++i) {
    rx.v[i] = f.v[i] - rx.v[i];
    ry.v[i] = f.v[i] - ry.v[i];
  }
  return {l2_norm(rx) / nrm, l2_norm(ry) / nrm};
}

struct WaveDecayReport {
  double y_rate = 0.0;        // exponential rate of phi(0, y); negative
  double x_exponent = 0.0;    // algebraic exponent of phi(x, 0); near -2
  double fourier_strip = 0.0; // decay rate of radial max |phihat|; > 0 means
                              // a numerical analyticity strip
};

inline WaveDecayReport wave_decay_report(const SolitaryWave& w,
                                         double contamination_tol = 1e-6) {
  if (!w.converged)
    throw contract_error("wave_decay_report: wave did not converge");
  if (w.boundary_contamination > contamination_tol) {
    std::ostringstream os;
    os << "wave_decay_report: boundary contamination "
       << w.boundary_contamination << " exceeds " << contamination_tol
       << "; fits would be unreliable";
    throw numeric_error(os.str());
  }
  const Field& phi = w.profile;
  const Grid2D& g = phi.grid;
  const double peak = phi.max_abs();
  WaveDecayReport rep;

  {
    std::vector<double> ys, lg;
    for (int iy = 0; iy < g.ny; ++iy) {
      double y = g.y(iy);
      if (y < 2.0 || y > 0.5 * g.ly) continue;
      double v = std::abs(phi.at(g.nx / 2, iy));
      if (v < 1e-14 * peak) continue;
      ys.push_back(y);
      lg.push_back(std::log(v));
    }
    if (ys.size() < 10)
      throw contract_error("wave_decay_report: transverse fit window too small");
    rep.y_rate = linear_fit(ys, lg).first;
  }
  {
    std::vector<double> xs, lg;
    for (int ix = 0; ix < g.nx; ++ix) {
      double x = g.x(ix);
      if (x < 2.0 || x > 0.5 * g.lx) continue;
      double v = std::abs(phi.at(ix, g.ny / 2));
      if (v < 1e-14 * peak) continue;
      xs.push_back(std::log(x));
      lg.push_back(std::log(v));
    }
    if (xs.size() < 10)
      throw contract_error("wave_decay_report: propagation fit window too small");
    rep.x_exponent = linear_fit(xs, lg).first;
  }
  {
    Spectrum s = to_spectrum(phi);
    const double dr = std::max(std::numbers::pi / g.lx, std::numbers::pi / g.ly);
    const double rmax = std::min(std::abs(g.kx(g.nx / 2)), std::abs(g.ky(g.ny / 2)));
    const int nbins = int(rmax / dr);
    std::vector<double> binmax(nbins, 0.0);
    double smax = 0.0;
    for (int jx = 0; jx < g.nx; ++jx)
      for (int jy = 0; jy < g.ny; ++jy) {
        double rr = std::hypot(g.kx(jx), g.ky(jy));
        double v = std::abs(s.at(jx, jy));
        smax = std::max(smax, v);
        int b = int(rr / dr);
        if (b < nbins) binmax[b] = std::max(binmax[b], v);
      }
    std::vector<double> rs, lg;
    for (int b = 0; b < nbins; ++b) {
      double rc = (b + 0.5) * dr;
      if (rc < 0.3 * rmax || rc > 0.95 * rmax) continue;
      if (binmax[b] < 1e-13 * smax) continue;
      rs.push_back(rc);
      lg.push_back(std::log(binmax[b]));
    }
    if (rs.size() < 6)
      throw contract_error("wave_decay_report: Fourier fit window too small");
    rep.fourier_strip = -linear_fit(rs, lg).first;
  }
  return rep;
}

inline nlohmann::json to_json(const SolitaryWave& w) {
  nlohmann::json j;
  j["params"] = params_to_json(w.params);
  j["iterations"] = w.iterations;
  j["converged"] = w.converged;
  j["eq_residual_inf"] = w.eq_residual_inf;
  j["functionals"] = to_json(w.functional_report);
  j["pohojaev"] = w.pohojaev;
  j["stabilizer_history"] = w.stabilizer_history;
  j["boundary_contamination"] = w.boundary_contamination;
  j["sign_map"] = w.sign_map;
  return j;
}

}  // namespace bozk
