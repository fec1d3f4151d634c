#pragma once

#include <random>

#include "bozk/spectral.hpp"

namespace bozk::test {

// White-noise field with the Nyquist column/row removed, so the odd-symbol
// multiplier identities hold exactly (the Nyquist mode has no sign).
inline Field random_field(const Grid2D& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Field f(g);
  for (double& x : f.v) x = gauss(rng);
  Spectrum s = to_spectrum(f);
  for (int jy = 0; jy < g.ny; ++jy) s.at(g.nx / 2, jy) = 0.0;
  for (int jx = 0; jx < g.nx; ++jx) s.at(jx, g.ny / 2) = 0.0;
  return to_field(s);
}

// Random field supported on |sx|,|sy| <= n/4 (safely band-limited).
inline Field smooth_random_field(const Grid2D& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Field f(g);
  for (double& x : f.v) x = gauss(rng);
  Spectrum s = to_spectrum(f);
  for (int jx = 0; jx < g.nx; ++jx)
    for (int jy = 0; jy < g.ny; ++jy)
      if (std::abs(g.sx(jx)) > g.nx / 4 || std::abs(g.sy(jy)) > g.ny / 4)
        s.at(jx, jy) = 0.0;
  return to_field(s);
}

inline Field gaussian(const Grid2D& g, double width_sq = 1.0, double amp = 1.0) {
  Field f(g);
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy) {
      double x = g.x(ix), y = g.y(iy);
      f.at(ix, iy) = amp * std::exp(-(x * x + y * y) / width_sq);
    }
  return f;
}

inline double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i)
    m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

}  // namespace bozk::test
