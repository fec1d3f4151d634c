#pragma once

// Periodic-box discretization of the plane and the Fourier-multiplier
// operators used by the rest of the library.
//
// Conventions (fixed here, used everywhere):
//   * The box is [-lx, lx) x [-ly, ly); grid point (ix, iy) sits at
//     x = -lx + ix*dx, y = -ly + iy*dy.
//   * Fields are stored row-major with x as the slow index: v[ix*ny + iy].
//   * Forward transform = plain unnormalized DFT sum; the inverse divides
//     by nx*ny.  With that choice, sum(|f|^2)*dx*dy (physical) equals
//     sum(|fhat|^2)*dx*dy/(nx*ny) (spectral).
//   * The Nyquist column/row is zeroed by every odd-symbol multiplier
//     (sgn, odd derivatives) and by |kx|^{1/2}, so that <f, H f_x> equals
//     ||Dx^{1/2} f||^2 for every field, not just band-limited ones.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace bozk {

using cplx = std::complex<double>;

class contract_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class regime_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Grid2D {
  int nx = 0, ny = 0;
  double lx = 0.0, ly = 0.0;

  Grid2D() = default;
  Grid2D(int nx_, int ny_, double lx_, double ly_)
      : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
    if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0)
      throw contract_error("Grid2D: nx, ny must be even and >= 8");
    if (!(lx > 0.0) || !(ly > 0.0))
      throw contract_error("Grid2D: lx, ly must be positive");
  }

  double dx() const { return 2.0 * lx / nx; }
  double dy() const { return 2.0 * ly / ny; }
  double area() const { return 4.0 * lx * ly; }
  std::size_t size() const { return std::size_t(nx) * std::size_t(ny); }

  // signed integer index of transform slot j (j in [0, n))
  static int signed_index(int j, int n) { return j <= n / 2 ? j : j - n; }
  int sx(int jx) const { return signed_index(jx, nx); }
  int sy(int jy) const { return signed_index(jy, ny); }

  double kx(int jx) const { return std::numbers::pi / lx * sx(jx); }
  double ky(int jy) const { return std::numbers::pi / ly * sy(jy); }

  double x(int ix) const { return -lx + ix * dx(); }
  double y(int iy) const { return -ly + iy * dy(); }

  bool is_nyquist_x(int jx) const { return jx == nx / 2; }
  bool is_nyquist_y(int jy) const { return jy == ny / 2; }

  bool operator==(const Grid2D&) const = default;
};

struct Field {
  Grid2D grid;
  std::vector<double> v;

  Field() = default;
  explicit Field(const Grid2D& g) : grid(g), v(g.size(), 0.0) {}

  double& at(int ix, int iy) { return v[std::size_t(ix) * grid.ny + iy]; }
  double at(int ix, int iy) const { return v[std::size_t(ix) * grid.ny + iy]; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

struct Spectrum {
  Grid2D grid;
  std::vector<cplx> c;

  Spectrum() = default;
  explicit Spectrum(const Grid2D& g) : grid(g), c(g.size()) {}

  cplx& at(int jx, int jy) { return c[std::size_t(jx) * grid.ny + jy]; }
  cplx at(int jx, int jy) const { return c[std::size_t(jx) * grid.ny + jy]; }
};

namespace detail {

// One forward/inverse plan pair per grid size.  Plan creation is guarded by
// a mutex (the FFTW planner is not thread-safe); executing a cached plan on
// caller-owned arrays via the new-array interface is.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

inline PlanPair plans_for(int nx, int ny) {
  static std::map<std::pair<int, int>, PlanPair> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(nx, ny);
  auto it = cache.find(key);
  if (it == cache.end()) {
    std::vector<cplx> a(std::size_t(nx) * ny), b(std::size_t(nx) * ny);
    PlanPair p;
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.fwd = fftw_plan_dft_2d(nx, ny, reinterpret_cast<fftw_complex*>(a.data()),
                             reinterpret_cast<fftw_complex*>(b.data()),
                             FFTW_FORWARD, flags);
    p.inv = fftw_plan_dft_2d(nx, ny, reinterpret_cast<fftw_complex*>(a.data()),
                             reinterpret_cast<fftw_complex*>(b.data()),
                             FFTW_BACKWARD, flags);
    it = cache.emplace(key, p).first;
  }
  return it->second;
}

inline void dft(const Grid2D& g, const cplx* in, cplx* out, bool forward) {
  PlanPair p = plans_for(g.nx, g.ny);
  fftw_execute_dft(forward ? p.fwd : p.inv,
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

// Kahan-compensated sum; keeps the 1e-12 identity tests honest on big grids.
struct KahanSum {
  double s = 0.0, comp = 0.0;
  void add(double x) {
    double y = x - comp;
    double t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  double value() const { return s; }
};

}  // namespace detail

inline void fft_forward(const Grid2D& g, const cplx* in, cplx* out) {
  detail::dft(g, in, out, true);
}

inline void fft_inverse(const Grid2D& g, const cplx* in, cplx* out) {
  detail::dft(g, in, out, false);
  const double inv = 1.0 / double(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] *= inv;
}

inline Spectrum to_spectrum(const Field& f) {
  if (f.v.size() != f.grid.size())
    throw contract_error("to_spectrum: field size does not match grid");
  Spectrum s(f.grid);
  std::vector<cplx> tmp(f.v.begin(), f.v.end());
  fft_forward(f.grid, tmp.data(), s.c.data());
  return s;
}

inline Field to_field(const Spectrum& s) {
  if (s.c.size() != s.grid.size())
    throw contract_error("to_field: spectrum size does not match grid");
  std::vector<cplx> tmp(s.grid.size());
  fft_inverse(s.grid, s.c.data(), tmp.data());
  Field f(s.grid);
  for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] = tmp[i].real();
  return f;
}

// Applies a real multiplier m(jx, jy) in place.
template <class Mult>
inline void apply_real_multiplier(Spectrum& s, Mult m) {
  const Grid2D& g = s.grid;
  for (int jx = 0; jx < g.nx; ++jx)
    for (int jy = 0; jy < g.ny; ++jy) s.at(jx, jy) *= m(jx, jy);
}

inline Field hilbert_x(const Field& f) {
  Spectrum s = to_spectrum(f);
  const Grid2D& g = f.grid;
  for (int jx = 0; jx < g.nx; ++jx) {
    double sg = g.is_nyquist_x(jx) ? 0.0
                : g.sx(jx) > 0     ? 1.0
                : g.sx(jx) < 0     ? -1.0
                                   : 0.0;
    cplx mult(0.0, -sg);  // -i*sgn(kx)
    for (int jy = 0; jy < g.ny; ++jy) s.at(jx, jy) *= mult;
  }
  return to_field(s);
}

inline Field dx_half(const Field& f) {
  Spectrum s = to_spectrum(f);
  const Grid2D& g = f.grid;
  apply_real_multiplier(s, [&](int jx, int) {
    return g.is_nyquist_x(jx) ? 0.0 : std::sqrt(std::abs(g.kx(jx)));
  });
  return to_field(s);
}

enum class Axis { x, y };

inline Field deriv(const Field& f, Axis axis, int order) {
  if (order < 1 || order > 4)
    throw contract_error("deriv: order must be in [1, 4]");
  Spectrum s = to_spectrum(f);
  const Grid2D& g = f.grid;
  const bool odd = order % 2 == 1;
  for (int jx = 0; jx < g.nx; ++jx) {
    for (int jy = 0; jy < g.ny; ++jy) {
      double k = axis == Axis::x ? g.kx(jx) : g.ky(jy);
      bool nyq = axis == Axis::x ? g.is_nyquist_x(jx) : g.is_nyquist_y(jy);
      cplx m = (odd && nyq) ? cplx(0.0)
                            : std::pow(cplx(0.0, k), order);
      s.at(jx, jy) *= m;
    }
  }
  return to_field(s);
}

inline double integrate(const Field& f) {
  detail::KahanSum ks;
  for (double x : f.v) ks.add(x);
  return ks.value() * f.grid.dx() * f.grid.dy();
}

inline double inner(const Field& f, const Field& g) {
  if (!(f.grid == g.grid)) throw contract_error("inner: grid mismatch");
  detail::KahanSum ks;
  for (std::size_t i = 0; i < f.v.size(); ++i) ks.add(f.v[i] * g.v[i]);
  return ks.value() * f.grid.dx() * f.grid.dy();
}

inline double l2_sq(const Field& f) { return inner(f, f); }
inline double l2_norm(const Field& f) { return std::sqrt(l2_sq(f)); }

// Quadratic form sum w(jx,jy)*|fhat|^2 converted to physical normalization,
// i.e. the spectral evaluation of integral of |W^{1/2} f|^2.
template <class Weight>
inline double spectral_quadratic(const Spectrum& s, Weight w) {
  const Grid2D& g = s.grid;
  detail::KahanSum ks;
  for (int jx = 0; jx < g.nx; ++jx)
    for (int jy = 0; jy < g.ny; ++jy) ks.add(w(jx, jy) * std::norm(s.at(jx, jy)));
  return ks.value() * g.dx() * g.dy() / double(g.size());
}

// ||d_y f||_2^2 (y-Nyquist excluded, matching deriv's convention).
inline double dy_l2_sq(const Spectrum& s) {
  const Grid2D& g = s.grid;
  return spectral_quadratic(s, [&](int, int jy) {
    return g.is_nyquist_y(jy) ? 0.0 : g.ky(jy) * g.ky(jy);
  });
}

// ||Dx^{1/2} f||_2^2 == <f, H f_x>; x-Nyquist excluded on both sides.
inline double dxhalf_l2_sq(const Spectrum& s) {
  const Grid2D& g = s.grid;
  return spectral_quadratic(s, [&](int jx, int) {
    return g.is_nyquist_x(jx) ? 0.0 : std::abs(g.kx(jx));
  });
}

inline Field circshift(const Field& f, int sx, int sy) {
  const Grid2D& g = f.grid;
  Field out(g);
  auto wrap = [](int i, int n) { return ((i % n) + n) % n; };
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy)
      out.at(wrap(ix + sx, g.nx), wrap(iy + sy, g.ny)) = f.at(ix, iy);
  return out;
}

// f(x - shift_x, y - shift_y) for real-valued shifts via Fourier phases.
// Nyquist modes get the real-valued cos(k*s) factor so the output stays real.
inline Field fourier_shift(const Field& f, double shift_x, double shift_y) {
  Spectrum s = to_spectrum(f);
  const Grid2D& g = f.grid;
  for (int jx = 0; jx < g.nx; ++jx) {
    for (int jy = 0; jy < g.ny; ++jy) {
      double phase = g.kx(jx) * shift_x + g.ky(jy) * shift_y;
      if (g.is_nyquist_x(jx) || g.is_nyquist_y(jy)) {
        s.at(jx, jy) *= std::cos(phase);
      } else {
        s.at(jx, jy) *= std::exp(cplx(0.0, -phase));
      }
    }
  }
  return to_field(s);
}

inline Field reflect_x(const Field& f) {
  const Grid2D& g = f.grid;
  Field out(g);
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy)
      out.at((g.nx - ix) % g.nx, iy) = f.at(ix, iy);
  return out;
}

inline Field reflect_y(const Field& f) {
  const Grid2D& g = f.grid;
  Field out(g);
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy)
      out.at(ix, (g.ny - iy) % g.ny) = f.at(ix, iy);
  return out;
}

}  // namespace bozk
