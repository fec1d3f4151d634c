#pragma once

// Time integration of u_t + u^p u_x + alpha H u_xx + eps u_xyy = 0 with an
// integrating-factor classical RK4: the dispersive phase exp(-i w(k) t),
// w = alpha k1|k1| - eps k1 k2^2, is applied exactly, RK4 handles only the
// advection term.  Also the orbital-distance diagnostic and the stability
// experiment built on it.

#include <ostream>
#include <random>

#include "bozk/functionals.hpp"
#include "bozk/params.hpp"
#include "bozk/spectral.hpp"

namespace bozk {

enum class Dealias { two_thirds, zero_pad };

struct EvolveOptions {
  Dealias dealias = Dealias::two_thirds;
  int record_stride = 0;          // 0: pick so that ~200 records are kept
  int snapshot_stride = 0;        // 0: no snapshots
  std::function<void(double, const Field&)> snapshot_sink;
  const Field* reference = nullptr;  // track orbital distance to this wave
  bool skew_split = true;            // split form of u^p u_x for integer p
};

struct EvolveReport {
  std::vector<double> times;
  std::vector<double> mass_drift;
  std::vector<double> energy_drift;
  std::vector<double> orbital_distance;
  Field final_field;
  double dt = 0.0;
  long steps = 0;
  std::string dealias_rule;
  bool aborted = false;
  std::string abort_reason;
};

double orbital_distance(const Field& u, const Field& phi);

namespace detail {

inline double dispersion_omega(const Params& q, double k1, double k2) {
  return q.alpha * k1 * std::abs(k1) - q.epsilon * k1 * k2 * k2;
}

// Workspaces for the nonlinear term N(u) = -u^p u_x evaluated from a
// spectrum; everything sized once per evolve call.
struct NonlinearEval {
  const Grid2D g;
  Params q;
  RationalExp rexp;
  bool integer_p;
  bool skew;
  Dealias rule;
  std::vector<char> keep;        // 2/3-rule mask
  Grid2D gp{8, 8, 1.0, 1.0};     // padded grid (zero_pad rule)
  std::vector<cplx> a, b, c, d;  // scratch
  std::vector<cplx> pa, pb;      // padded scratch

  NonlinearEval(const Grid2D& g_, const Params& q_, const EvolveOptions& o)
      : g(g_), q(q_), rexp(require_rational_exponent(q_.p)),
        integer_p(rexp.m == 1), skew(o.skew_split && rexp.m == 1),
        rule(o.dealias),
        a(g.size()), b(g.size()), c(g.size()), d(g.size()) {
    if (rule == Dealias::two_thirds) {
      keep.resize(g.size());
      for (int jx = 0; jx < g.nx; ++jx)
        for (int jy = 0; jy < g.ny; ++jy)
          keep[std::size_t(jx) * g.ny + jy] =
              std::abs(g.sx(jx)) <= g.nx / 3 && std::abs(g.sy(jy)) <= g.ny / 3;
    } else {
      if (!integer_p)
        throw contract_error("evolve: zero_pad dealiasing needs integer p");
      int f = int(std::ceil((q.p + 2.0) / 2.0));
      gp = Grid2D(f * g.nx, f * g.ny, g.lx, g.ly);
      pa.resize(gp.size());
      pb.resize(gp.size());
    }
  }

  void mask(std::vector<cplx>& v) const {
    if (rule != Dealias::two_thirds) return;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!keep[i]) v[i] = 0.0;
  }

  // spread spectrum onto the padded grid (amplitudes preserved: the padded
  // inverse divides by the padded size, so scale by the size ratio)
  void embed(const std::vector<cplx>& src, std::vector<cplx>& dst) const {
    std::fill(dst.begin(), dst.end(), cplx(0.0));
    const double scale = double(gp.size()) / double(g.size());
    for (int jx = 0; jx < g.nx; ++jx) {
      int px = g.sx(jx) >= 0 ? g.sx(jx) : gp.nx + g.sx(jx);
      for (int jy = 0; jy < g.ny; ++jy) {
        int py = g.sy(jy) >= 0 ? g.sy(jy) : gp.ny + g.sy(jy);
        dst[std::size_t(px) * gp.ny + py] =
            scale * src[std::size_t(jx) * g.ny + jy];
      }
    }
  }

  void extract(const std::vector<cplx>& src, std::vector<cplx>& dst) const {
    const double scale = double(g.size()) / double(gp.size());
    for (int jx = 0; jx < g.nx; ++jx) {
      int px = g.sx(jx) >= 0 ? g.sx(jx) : gp.nx + g.sx(jx);
      for (int jy = 0; jy < g.ny; ++jy) {
        int py = g.sy(jy) >= 0 ? g.sy(jy) : gp.ny + g.sy(jy);
        dst[std::size_t(jx) * g.ny + jy] =
            scale * src[std::size_t(px) * gp.ny + py];
      }
    }
  }

  // out = fft(-u^p u_x) from uhat; physical max |u| reported for the blow-up
  // detector.
  void operator()(const std::vector<cplx>& uhat, std::vector<cplx>& out,
                  double* linf = nullptr) {
    if (rule == Dealias::zero_pad) {
      eval_padded(uhat, out, linf);
      return;
    }
    // c <- masked uhat; d <- masked i*kx*uhat
    for (std::size_t i = 0; i < g.size(); ++i) c[i] = uhat[i];
    mask(c);
    for (int jx = 0; jx < g.nx; ++jx) {
      cplx ikx = g.is_nyquist_x(jx) ? cplx(0.0) : cplx(0.0, g.kx(jx));
      for (int jy = 0; jy < g.ny; ++jy) {
        std::size_t i = std::size_t(jx) * g.ny + jy;
        d[i] = ikx * c[i];
      }
    }
    fft_inverse(g, c.data(), a.data());  // a = u
    fft_inverse(g, d.data(), b.data());  // b = u_x
    if (linf) {
      double m = 0.0;
      for (const cplx& z : a) m = std::max(m, std::abs(z.real()));
      *linf = m;
    }
    if (skew) {
      // u^p u_x = [d_x(u^{p+1}) + u^p u_x] / (p+2)
      const long pi_ = rexp.k;
      const double w = 1.0 / (q.p + 2.0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        double u = a[i].real(), ux = b[i].real();
        double up = 1.0;
        for (long j = 0; j < pi_; ++j) up *= u;
        c[i] = up * u;       // u^{p+1}
        d[i] = up * ux;      // u^p u_x
      }
      fft_forward(g, c.data(), a.data());
      fft_forward(g, d.data(), b.data());
      for (int jx = 0; jx < g.nx; ++jx) {
        cplx ikx = g.is_nyquist_x(jx) ? cplx(0.0) : cplx(0.0, g.kx(jx));
        for (int jy = 0; jy < g.ny; ++jy) {
          std::size_t i = std::size_t(jx) * g.ny + jy;
          out[i] = -w * (ikx * a[i] + b[i]);
        }
      }
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) {
        double u = a[i].real(), ux = b[i].real();
        c[i] = signed_pow(u, rexp.k, rexp.m) * ux;
      }
      fft_forward(g, c.data(), out.data());
      for (std::size_t i = 0; i < g.size(); ++i) out[i] = -out[i];
    }
    mask(out);
  }

  void eval_padded(const std::vector<cplx>& uhat, std::vector<cplx>& out,
                   double* linf) {
    embed(uhat, pa);
    fft_inverse(gp, pa.data(), pb.data());  // pb = u on fine grid
    if (linf) {
      double m = 0.0;
      for (const cplx& z : pb) m = std::max(m, std::abs(z.real()));
      *linf = m;
    }
    // u^{p+1} on the fine grid, conservative form d_x(u^{p+1})/(p+1)
    // combined with the advective form via the skew split when requested
    const long pi_ = rexp.k;
    if (skew) {
      std::vector<cplx>& ux = pa;
      embed(uhat, pa);
      for (int jx = 0; jx < gp.nx; ++jx) {
        cplx ikx = gp.is_nyquist_x(jx) ? cplx(0.0) : cplx(0.0, gp.kx(jx));
        for (int jy = 0; jy < gp.ny; ++jy) ux[std::size_t(jx) * gp.ny + jy] *= ikx;
      }
      std::vector<cplx> uxp(gp.size());
      fft_inverse(gp, ux.data(), uxp.data());
      const double w = 1.0 / (q.p + 2.0);
      for (std::size_t i = 0; i < gp.size(); ++i) {
        double u = pb[i].real(), du = uxp[i].real();
        double up = 1.0;
        for (long j = 0; j < pi_; ++j) up *= u;
        pa[i] = up * u;
        uxp[i] = up * du;
      }
      std::vector<cplx> t1(gp.size()), t2(gp.size());
      fft_forward(gp, pa.data(), t1.data());
      fft_forward(gp, uxp.data(), t2.data());
      for (int jx = 0; jx < gp.nx; ++jx) {
        cplx ikx = gp.is_nyquist_x(jx) ? cplx(0.0) : cplx(0.0, gp.kx(jx));
        for (int jy = 0; jy < gp.ny; ++jy) {
          std::size_t i = std::size_t(jx) * gp.ny + jy;
          t1[i] = -w * (ikx * t1[i] + t2[i]);
        }
      }
      extract(t1, out);
    } else {
      std::vector<cplx>& ux = pa;
      embed(uhat, pa);
      for (int jx = 0; jx < gp.nx; ++jx) {
        cplx ikx = gp.is_nyquist_x(jx) ? cplx(0.0) : cplx(0.0, gp.kx(jx));
        for (int jy = 0; jy < gp.ny; ++jy) ux[std::size_t(jx) * gp.ny + jy] *= ikx;
      }
      std::vector<cplx> uxp(gp.size());
      fft_inverse(gp, ux.data(), uxp.data());
      for (std::size_t i = 0; i < gp.size(); ++i) {
        double u = pb[i].real();
        double up = 1.0;
        for (long j = 0; j < pi_; ++j) up *= u;
        uxp[i] = -up * uxp[i].real();
      }
      std::vector<cplx> t1(gp.size());
      fft_forward(gp, uxp.data(), t1.data());
      extract(t1, out);
    }
  }
};

}  // namespace detail

// Integrating-factor RK4 evolution.  dt and t_end must share a sign (negative
// values step backward in time).
inline EvolveReport evolve(const Field& u0, const Params& q, double dt,
                           double t_end, const EvolveOptions& opts = {}) {
  q.validate();
  if (dt == 0.0 || t_end * dt < 0.0)
    throw contract_error("evolve: dt and t_end must be nonzero with equal sign");
  const Grid2D& g = u0.grid;
  const long nsteps = std::lround(t_end / dt);
  if (nsteps < 1) throw contract_error("evolve: fewer than one step requested");

  // CFL-style sanity on the advection speed max|u^p|
  {
    double umax = u0.max_abs();
    auto r = require_rational_exponent(q.p);
    double speed = std::pow(umax, double(r.k) / double(r.m));
    if (std::abs(dt) * speed > 0.5 * g.dx())
      throw contract_error("evolve: dt violates the advective CFL bound "
                           "|dt| max|u|^p <= dx/2");
  }

  detail::NonlinearEval N(g, q, opts);
  const std::size_t n = g.size();

  // half- and full-step dispersive phases
  std::vector<cplx> e_half(n), e_half_conj(n);
  for (int jx = 0; jx < g.nx; ++jx)
    for (int jy = 0; jy < g.ny; ++jy) {
      double w = detail::dispersion_omega(q, g.kx(jx), g.ky(jy));
      e_half[std::size_t(jx) * g.ny + jy] = std::exp(cplx(0.0, -w * dt / 2.0));
      e_half_conj[std::size_t(jx) * g.ny + jy] = std::exp(cplx(0.0, w * dt / 2.0));
    }

  std::vector<cplx> uhat(n), g1(n), g2(n), g3(n), g4(n), tmp(n);
  {
    std::vector<cplx> t(u0.v.begin(), u0.v.end());
    fft_forward(g, t.data(), uhat.data());
  }

  EvolveReport rep;
  rep.dt = dt;
  rep.steps = nsteps;
  rep.dealias_rule = opts.dealias == Dealias::two_thirds ? "2/3" : "zero_pad";

  const double m0 = mass(u0);
  const double e0 = energy(u0, q);
  const double u0max = u0.max_abs();
  long stride = opts.record_stride > 0 ? opts.record_stride
                                       : std::max(1L, nsteps / 200);

  auto snapshot_field = [&](const std::vector<cplx>& sh) {
    std::vector<cplx> t(n);
    fft_inverse(g, sh.data(), t.data());
    Field f(g);
    for (std::size_t i = 0; i < n; ++i) f.v[i] = t[i].real();
    return f;
  };

  auto record = [&](double t, const Field& u) {
    rep.times.push_back(t);
    double m = mass(u), e = energy(u, q);
    rep.mass_drift.push_back(m0 != 0.0 ? std::abs(m - m0) / std::abs(m0)
                                       : std::abs(m));
    rep.energy_drift.push_back(e0 != 0.0 ? std::abs(e - e0) / std::abs(e0)
                                         : std::abs(e));
    if (opts.reference)
      rep.orbital_distance.push_back(orbital_distance(u, *opts.reference));
  };
  record(0.0, u0);

  double linf = 0.0;
  for (long s = 0; s < nsteps; ++s) {
    // g1 = N(u)
    N(uhat, g1, &linf);
    if (!std::isfinite(linf) || (u0max > 0.0 && linf > 1e6 * u0max)) {
      rep.aborted = true;
      rep.abort_reason = "blow-up detected";
      break;
    }
    // g2 = E^-1 N(E (u + dt/2 g1))
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = e_half[i] * (uhat[i] + 0.5 * dt * g1[i]);
    N(tmp, g2);
    for (std::size_t i = 0; i < n; ++i) g2[i] *= e_half_conj[i];
    // g3 = E^-1 N(E (u + dt/2 g2))
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = e_half[i] * (uhat[i] + 0.5 * dt * g2[i]);
    N(tmp, g3);
    for (std::size_t i = 0; i < n; ++i) g3[i] *= e_half_conj[i];
    // g4 = E^-2 N(E^2 (u + dt g3))
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = e_half[i] * e_half[i] * (uhat[i] + dt * g3[i]);
    N(tmp, g4);
    for (std::size_t i = 0; i < n; ++i)
      g4[i] *= e_half_conj[i] * e_half_conj[i];

    for (std::size_t i = 0; i < n; ++i) {
      cplx w = uhat[i] + dt / 6.0 * (g1[i] + 2.0 * g2[i] + 2.0 * g3[i] + g4[i]);
      uhat[i] = e_half[i] * e_half[i] * w;
    }

    long done = s + 1;
    if (done % stride == 0 || done == nsteps) {
      Field u = snapshot_field(uhat);
      if (!u.all_finite()) {
        rep.aborted = true;
        rep.abort_reason = "non-finite field";
        break;
      }
      record(done * dt, u);
      if (opts.snapshot_stride > 0 && opts.snapshot_sink &&
          done % opts.snapshot_stride == 0)
        opts.snapshot_sink(done * dt, u);
    }
  }

  rep.final_field = snapshot_field(uhat);
  return rep;
}

// inf over translations of ||u - phi(. - r)||_Z, located by FFT
// cross-correlation under the Z inner product over all integer grid shifts,
// then refined once on a bi-quadratic fit of the correlation peak.
inline double orbital_distance(const Field& u, const Field& phi) {
  if (!(u.grid == phi.grid)) throw contract_error("orbital_distance: grid mismatch");
  const Grid2D& g = u.grid;
  Spectrum su = to_spectrum(u), sp = to_spectrum(phi);

  auto zw = [&](int jx, int jy) {
    double w = 1.0;
    if (!g.is_nyquist_x(jx)) w += std::abs(g.kx(jx));
    if (!g.is_nyquist_y(jy)) w += g.ky(jy) * g.ky(jy);
    return w;
  };

  double nu = 0.0, np = 0.0;
  std::vector<cplx> cross(g.size());
  for (int jx = 0; jx < g.nx; ++jx)
    for (int jy = 0; jy < g.ny; ++jy) {
      std::size_t i = std::size_t(jx) * g.ny + jy;
      double w = zw(jx, jy);
      nu += w * std::norm(su.c[i]);
      np += w * std::norm(sp.c[i]);
      cross[i] = w * su.c[i] * std::conj(sp.c[i]);
    }
  const double scale = g.dx() * g.dy() / double(g.size());
  nu *= scale;
  np *= scale;

  // corr(s) = <u, phi(.-s)>_Z on all integer shifts via one inverse DFT
  std::vector<cplx> corr(g.size());
  fft_inverse(g, cross.data(), corr.data());
  int bi = 0, bj = 0;
  double best = -1e300;
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy) {
      double v = corr[std::size_t(ix) * g.ny + iy].real();
      if (v > best) {
        best = v;
        bi = ix;
        bj = iy;
      }
    }
  best *= scale * double(g.size());  // undo inverse-DFT normalization

  // one bi-quadratic refinement of the peak; fall back to the grid value if
  // the refined shift does not improve the correlation
  auto corr_at = [&](double sx, double sy) {
    detail::KahanSum re;
    for (int jx = 0; jx < g.nx; ++jx)
      for (int jy = 0; jy < g.ny; ++jy) {
        std::size_t i = std::size_t(jx) * g.ny + jy;
        double ph = g.kx(jx) * sx + g.ky(jy) * sy;
        re.add((cross[i] * std::exp(cplx(0.0, ph))).real());
      }
    return re.value() * scale;
  };
  auto wrapped = [&](int i, int n) { return corr[std::size_t(((i % g.nx) + g.nx) % g.nx) * g.ny + ((n % g.ny) + g.ny) % g.ny].real(); };
  double ca = wrapped(bi - 1, bj), cb = wrapped(bi, bj), cc = wrapped(bi + 1, bj);
  double ox = 0.0, oy = 0.0;
  if (ca - 2 * cb + cc < 0.0) ox = std::clamp(0.5 * (ca - cc) / (ca - 2 * cb + cc), -0.5, 0.5);
  ca = wrapped(bi, bj - 1);
  cc = wrapped(bi, bj + 1);
  if (ca - 2 * cb + cc < 0.0) oy = std::clamp(0.5 * (ca - cc) / (ca - 2 * cb + cc), -0.5, 0.5);
  if (ox != 0.0 || oy != 0.0) {
    double refined = corr_at((bi + ox) * g.dx(), (bj + oy) * g.dy());
    best = std::max(best, refined);
  }

  double d2 = nu + np - 2.0 * best;
  return std::sqrt(std::max(0.0, d2));
}

// Fixed seeded random perturbation, even in x and y, built from low modes
// and normalized to unit sup norm.
inline Field even_random_perturbation(const Grid2D& g, std::uint64_t seed,
                                      int max_mode = 8) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Field f(g);
  for (int mx = 0; mx <= max_mode; ++mx)
    for (int my = 0; my <= max_mode; ++my) {
      double a = gauss(rng) / (1.0 + mx * mx + my * my);
      for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy)
          f.at(ix, iy) += a * std::cos(mx * std::numbers::pi / g.lx * g.x(ix)) *
                          std::cos(my * std::numbers::pi / g.ly * g.y(iy));
    }
  double m = f.max_abs();
  if (m > 0.0)
    for (double& x : f.v) x /= m;
  return f;
}

// Evolves phi*(1 + delta*eta) for a fixed random even perturbation eta and
// records the orbital distance to phi.
inline EvolveReport stability_experiment(const Field& phi, const Params& q,
                                         double perturbation_size, double t_end,
                                         double dt, std::uint64_t seed = 0,
                                         const EvolveOptions& base_opts = {}) {
  if (perturbation_size < 0.0 || perturbation_size > 0.1)
    throw contract_error("stability_experiment: perturbation size must be in [0, 0.1]");
  Field u0 = phi;
  if (perturbation_size > 0.0) {
    Field eta = even_random_perturbation(phi.grid, seed);
    for (std::size_t i = 0; i < u0.v.size(); ++i)
      u0.v[i] = phi.v[i] * (1.0 + perturbation_size * eta.v[i]);
  }
  EvolveOptions opts = base_opts;
  opts.reference = &phi;
  return evolve(u0, q, dt, t_end, opts);
}

inline void write_series_csv(std::ostream& os, const EvolveReport& r) {
  os << "t,mass_drift,energy_drift,orbital_distance\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    os << r.times[i] << ',' << r.mass_drift[i] << ',' << r.energy_drift[i]
       << ',';
    if (i < r.orbital_distance.size()) os << r.orbital_distance[i];
    os << '\n';
  }
}

}  // namespace bozk
