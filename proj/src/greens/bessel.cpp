#include <cmath>
#include <vector>

#include "fieldperc/greens.hpp"

namespace fieldperc::greens {

// Miller backward recurrence for the whole ladder I_0..I_n scaled by e^{-z}.
// The downward pass f_{k-1} = f_{k+1} + (2k/z) f_k grows toward k = 0, so we
// rescale on overflow risk; the final normalization uses the Neumann identity
// I_0(z) + 2 sum_{k>=1} I_k(z) = e^z.
void ive_ladder(double z, int n_max, double* out) {
  if (z == 0.0) {
    out[0] = 1.0;
    for (int k = 1; k <= n_max; ++k) out[k] = 0.0;
    return;
  }
  const int start =
      static_cast<int>(std::fmax(static_cast<double>(n_max) + 40.0,
                                 z + 40.0 + 12.0 * std::sqrt(z)));
  std::vector<double> f(static_cast<std::size_t>(start) + 2, 0.0);
  f[static_cast<std::size_t>(start) + 1] = 0.0;
  f[static_cast<std::size_t>(start)] = 1e-280;
  for (int k = start; k >= 1; --k) {
    f[static_cast<std::size_t>(k) - 1] =
        f[static_cast<std::size_t>(k) + 1] +
        (2.0 * static_cast<double>(k) / z) * f[static_cast<std::size_t>(k)];
    if (f[static_cast<std::size_t>(k) - 1] > 1e260) {
      for (int j = k - 1; j <= start + 1; ++j)
        f[static_cast<std::size_t>(j)] *= 1e-260;
    }
  }
  double norm = f[0];
  for (int k = 1; k <= start; ++k) norm += 2.0 * f[static_cast<std::size_t>(k)];
  const double inv = 1.0 / norm;
  for (int k = 0; k <= n_max; ++k) out[k] = f[static_cast<std::size_t>(k)] * inv;
}

}  // namespace fieldperc::greens
