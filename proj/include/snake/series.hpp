#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <vector>

namespace snake {

enum class SeriesKind { gamma, q, rho };

/// Exact coefficient sequence v_first..v_N.
///
/// For kind q the exact rationals stop at exact_limit; beyond that only
/// log_values (computed with running normalization) are kept.
struct SeriesCoefficients {
  SeriesKind kind = SeriesKind::q;
  int dimension = 0;
  std::size_t first_index = 0;
  std::size_t last_index = 0;
  std::vector<mpq_class> exact;          // exact[k] = v_{first_index + k}
  std::vector<long double> log_values;   // log v_n, n = first_index..last_index (q only)
  mpq_class delta;                       // (d-4)/(d-2) for kind q

  const mpq_class& at(std::size_t n) const { return exact.at(n - first_index); }
  std::size_t exact_count() const { return exact.size(); }
  long double log_value(std::size_t n) const { return log_values.at(n - first_index); }
  // Re-checks the defining recurrence on the exact part.
  bool verify_recurrence() const;
};

inline constexpr std::size_t kExactSeriesLimit = 300;

SeriesCoefficients q_seq(int d, std::size_t N, std::size_t exact_limit = kExactSeriesLimit);
SeriesCoefficients rho_seq(std::size_t N);
SeriesCoefficients gamma_seq(std::size_t N);

struct SeriesRadius {
  double radius = 0.0;        // Richardson-extrapolated ratio limit
  double radius_error = 0.0;  // spread between extrapolation orders
  double aitken = 0.0;        // Aitken delta^2 on the last three ratios
  double raw_ratio = 0.0;     // q_{N-1} / q_N
  double root_test = 0.0;     // q_N^{-1/N}
  double a0 = 0.0;
  double a0_error = 0.0;
};

// Radius of convergence of sum q_n s^n and a_0 = R (d-2)^2 / 4.
// Throws when the ratio tail is not monotone.
SeriesRadius a0_from_series(const SeriesCoefficients& q);

// u_1(r) = r^{2-d} sum_n a_n r^{-n(d-4)} rebuilt from q_n and a_0.
double series_u1(const SeriesCoefficients& q, double a0, double r);

// Partial sums of the asymptotic d=4 expansion p(w) ~ sum_{n>=2} (-1)^{n+1} rho_n w^n,
// truncated before the smallest term. Returns {value, index of smallest term, its size}.
struct AsymptoticSum {
  double value = 0.0;
  std::size_t truncation = 0;
  double smallest_term = 0.0;
};
AsymptoticSum rho_asymptotic_sum(const SeriesCoefficients& rho, double w);

// sum_{n=1}^{N} gamma_n lambda^n.
double gamma_generating(const SeriesCoefficients& gamma, double lambda);

}  // namespace snake
