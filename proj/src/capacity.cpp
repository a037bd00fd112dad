#include <cmath>
#include <stdexcept>

#include "snake/geometry.hpp"
#include "snake/kernels.hpp"

namespace snake {

CapacityResult capacity(const PointCloud& support, const Kernel& f, double tol, std::size_t max_iters, double r_cell) {
  const std::size_t n = support.size();
  if (n == 0) throw std::invalid_argument("capacity: empty support");
  if (n > kMaxCapacityPoints) throw std::invalid_argument("capacity: support too large for a dense kernel matrix");
  CapacityResult res;
  if (r_cell <= 0.0) r_cell = n >= 2 ? median_nn_spacing(support, 2000, 0xcafe) : 1.0;
  res.r_cell = r_cell;
  const std::vector<double> F = kernels::kernel_matrix(support, f, r_cell);
  for (std::size_t k = 0; k < n * n; ++k)
    if (!std::isfinite(F[k])) throw std::invalid_argument("capacity: non-finite kernel value (deduplicate first)");

  // Start from the uniform measure.
  std::vector<double> nu(n, 1.0 / static_cast<double>(n)), Fnu(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += F[i * n + j] * nu[j];
    Fnu[i] = s;
  }
  auto quad = [&] {
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) q += nu[i] * Fnu[i];
    return q;
  };
  double Q = quad();
  // Frank-Wolfe with away steps: plain FW stalls at O(1/k) once the optimum sits on a face
  for (std::size_t it = 0; it < max_iters; ++it) {
    std::size_t j = 0, a = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (Fnu[i] < Fnu[j]) j = i;
      if (nu[i] > 0.0 && (a == n || Fnu[i] > Fnu[a])) a = i;
    }
    // <grad, nu - e_j> with grad = 2 F nu
    res.gap = 2.0 * (Q - Fnu[j]);
    res.iterations = it;
    if (res.gap <= tol * Q) {
      res.converged = true;
      break;
    }
    if (Q - Fnu[j] >= Fnu[a] - Q) {
      const double curv = F[j * n + j] - 2.0 * Fnu[j] + Q;
      const double gamma = curv > 0.0 ? std::min(1.0, (Q - Fnu[j]) / curv) : 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        nu[i] *= 1.0 - gamma;
        Fnu[i] = (1.0 - gamma) * Fnu[i] + gamma * F[i * n + j];
      }
      nu[j] += gamma;
    } else {
      const double gmax = nu[a] < 1.0 ? nu[a] / (1.0 - nu[a]) : 1e300;
      const double curv = F[a * n + a] - 2.0 * Fnu[a] + Q;
      const double gamma = curv > 0.0 ? std::min(gmax, (Fnu[a] - Q) / curv) : gmax;
      for (std::size_t i = 0; i < n; ++i) {
        nu[i] *= 1.0 + gamma;
        Fnu[i] = (1.0 + gamma) * Fnu[i] - gamma * F[i * n + a];
      }
      nu[a] = gamma == gmax ? 0.0 : nu[a] - gamma;
    }
    const double Qn = quad();
    if (Qn > Q * (1.0 + 1e-12)) res.monotone = false;
    Q = Qn;
  }
  res.energy = Q;
  res.capacity = 1.0 / Q;
  res.weights = std::move(nu);
  return res;
}

}  // namespace snake
