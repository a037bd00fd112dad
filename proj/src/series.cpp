#include "snake/series.hpp"

#include <cmath>
#include <stdexcept>

namespace snake {

namespace {

long double log_mpz(const mpz_class& z) {
  long e = 0;
  const double m = mpz_get_d_2exp(&e, z.get_mpz_t());
  return std::log(static_cast<long double>(m)) + static_cast<long double>(e) * std::log(2.0L);
}

long double log_mpq(const mpq_class& q) { return log_mpz(q.get_num()) - log_mpz(q.get_den()); }

}  // namespace

bool SeriesCoefficients::verify_recurrence() const {
  switch (kind) {
    case SeriesKind::q: {
      if (exact.empty() || exact[0] != 1) return false;
      for (std::size_t n = 1; n < exact.size(); ++n) {
        mpq_class s = 0;
        for (std::size_t k = 0; k < n; ++k) s += exact[k] * exact[n - 1 - k];
        const mpq_class nd = mpq_class(static_cast<long>(n)) * delta;
        if (exact[n] * nd * (nd + 1) != s) return false;
      }
      return true;
    }
    case SeriesKind::rho: {
      if (exact.empty() || at(2) != 1) return false;
      for (std::size_t n = 3; n <= last_index; ++n) {
        mpq_class s = 0;
        for (std::size_t k = 2; k <= n - 1; ++k) s += static_cast<long>(k) * at(k) * at(n - k + 1);
        if (at(n) != s) return false;
      }
      return true;
    }
    case SeriesKind::gamma: {
      if (exact.empty() || at(1) != mpq_class(1, 2)) return false;
      for (std::size_t n = 2; n <= last_index; ++n) {
        mpq_class s = 0;
        for (std::size_t k = 1; k < n; ++k) s += at(k) * at(n - k);
        if (at(n) != s / 2) return false;
      }
      return true;
    }
  }
  return false;
}

SeriesCoefficients q_seq(int d, std::size_t N, std::size_t exact_limit) {
  if (d < 5) throw std::invalid_argument("q_seq: d must be >= 5");
  SeriesCoefficients s;
  s.kind = SeriesKind::q;
  s.dimension = d;
  s.first_index = 0;
  s.last_index = N;
  s.delta = mpq_class(d - 4, d - 2);
  const std::size_t ne = std::min(N, exact_limit);
  s.exact.reserve(ne + 1);
  s.exact.emplace_back(1);
  for (std::size_t n = 1; n <= ne; ++n) {
    mpq_class sum = 0;
    for (std::size_t k = 0; k < n; ++k) sum += s.exact[k] * s.exact[n - 1 - k];
    const mpq_class nd = mpq_class(static_cast<long>(n)) * s.delta;
    mpq_class v = sum / (nd * (nd + 1));
    v.canonicalize();
    s.exact.push_back(std::move(v));
  }
  s.log_values.resize(N + 1);
  for (std::size_t n = 0; n <= ne; ++n) s.log_values[n] = log_mpq(s.exact[n]);
  if (N > ne) {
    // Running normalization: qs_n = q_n c^n with c close to the radius keeps values O(n).
    const long double log_c = ne >= 1 ? s.log_values[ne - 1] - s.log_values[ne] : 0.0L;
    const long double c = std::exp(log_c);
    const long double delta = static_cast<long double>(d - 4) / static_cast<long double>(d - 2);
    std::vector<long double> qs(N + 1);
    for (std::size_t n = 0; n <= ne; ++n) qs[n] = std::exp(s.log_values[n] + static_cast<long double>(n) * log_c);
    for (std::size_t n = ne + 1; n <= N; ++n) {
      long double sum = 0.0L;
      for (std::size_t k = 0; k < n; ++k) sum += qs[k] * qs[n - 1 - k];
      const long double nd = static_cast<long double>(n) * delta;
      qs[n] = c * sum / (nd * (nd + 1.0L));
      s.log_values[n] = std::log(qs[n]) - static_cast<long double>(n) * log_c;
    }
  }
  return s;
}

SeriesCoefficients rho_seq(std::size_t N) {
  if (N < 2) throw std::invalid_argument("rho_seq: N must be >= 2");
  SeriesCoefficients s;
  s.kind = SeriesKind::rho;
  s.first_index = 2;
  s.last_index = N;
  s.exact.emplace_back(1);
  for (std::size_t n = 3; n <= N; ++n) {
    mpz_class sum = 0;
    for (std::size_t k = 2; k <= n - 1; ++k)
      sum += static_cast<unsigned long>(k) * s.at(k).get_num() * s.at(n - k + 1).get_num();
    s.exact.emplace_back(sum);
  }
  return s;
}

SeriesCoefficients gamma_seq(std::size_t N) {
  if (N < 1) throw std::invalid_argument("gamma_seq: N must be >= 1");
  SeriesCoefficients s;
  s.kind = SeriesKind::gamma;
  s.first_index = 1;
  s.last_index = N;
  s.exact.emplace_back(1, 2);
  for (std::size_t n = 2; n <= N; ++n) {
    mpq_class sum = 0;
    for (std::size_t k = 1; k < n; ++k) sum += s.at(k) * s.at(n - k);
    sum /= 2;
    sum.canonicalize();
    s.exact.push_back(std::move(sum));
  }
  return s;
}

namespace {

// Polynomial extrapolation to h = 0 through points (h_i, x_i) (Neville).
double neville_at_zero(const std::vector<double>& h, std::vector<double> x) {
  const std::size_t m = h.size();
  for (std::size_t k = 1; k < m; ++k)
    for (std::size_t i = m - 1; i >= k; --i) {
      x[i] = (h[i - k] * x[i] - h[i] * x[i - 1]) / (h[i - k] - h[i]);
      if (i == k) break;
    }
  return x[m - 1];
}

}  // namespace

SeriesRadius a0_from_series(const SeriesCoefficients& q) {
  if (q.kind != SeriesKind::q) throw std::invalid_argument("a0_from_series: need q coefficients");
  const std::size_t N = q.last_index;
  if (N < 16) throw std::invalid_argument("a0_from_series: N too small");
  auto ratio = [&](std::size_t n) { return static_cast<double>(std::exp(q.log_value(n) - q.log_value(n + 1))); };
  // The tail of the ratio sequence must be monotone for the extrapolation to be meaningful.
  for (std::size_t n = N / 2; n + 2 < N; ++n) {
    const double a = ratio(n), b = ratio(n + 1);
    if (!(b >= a)) throw std::runtime_error("a0_from_series: non-monotone ratio tail (N too small)");
  }
  SeriesRadius out;
  out.raw_ratio = ratio(N - 1);
  out.root_test = static_cast<double>(std::exp(-q.log_value(N) / static_cast<long double>(N)));
  {
    const double x0 = ratio(N - 3), x1 = ratio(N - 2), x2 = ratio(N - 1);
    const double den = x2 - 2 * x1 + x0;
    out.aitken = den != 0.0 ? x2 - (x2 - x1) * (x2 - x1) / den : x2;
  }
  std::vector<double> h, x;
  for (std::size_t m = N - 1; m >= N / 16 && h.size() < 5; m /= 2) {
    h.push_back(1.0 / static_cast<double>(m));
    x.push_back(ratio(m));
  }
  const double r_hi = neville_at_zero(h, x);
  h.pop_back();
  x.pop_back();
  const double r_lo = neville_at_zero(h, x);
  out.radius = r_hi;
  out.radius_error = std::abs(r_hi - r_lo);
  const double d2 = static_cast<double>(q.dimension - 2);
  out.a0 = out.radius * d2 * d2 / 4.0;
  out.a0_error = out.radius_error * d2 * d2 / 4.0;
  return out;
}

double series_u1(const SeriesCoefficients& q, double a0, double r) {
  if (!(r > 1.0)) throw std::invalid_argument("series_u1: r must exceed 1");
  const int d = q.dimension;
  const long double dm2 = d - 2;
  const long double qq = 4.0L * std::pow(dm2, -static_cast<long double>(d) / dm2) * a0;
  const long double log_base = std::log(0.25L) + static_cast<long double>(d) / dm2 * std::log(dm2);
  const long double log_step = std::log(qq) - static_cast<long double>(d - 4) / dm2 * std::log(dm2) -
                               static_cast<long double>(d - 4) * std::log(static_cast<long double>(r));
  long double sum = 0.0L;
  for (std::size_t n = 0; n <= q.last_index; ++n) {
    const long double term =
        std::exp(log_base + q.log_value(n) + std::log(qq) + static_cast<long double>(n) * log_step);
    sum += term;
    if (n > 8 && term < 1e-18L * sum) break;
  }
  return static_cast<double>(std::pow(static_cast<long double>(r), 2.0L - d) * sum);
}

AsymptoticSum rho_asymptotic_sum(const SeriesCoefficients& rho, double w) {
  if (rho.kind != SeriesKind::rho) throw std::invalid_argument("rho_asymptotic_sum: need rho coefficients");
  AsymptoticSum out;
  long double sum = 0.0L;
  long double best = -1.0L;
  for (std::size_t n = 2; n <= rho.last_index; ++n) {
    const long double mag = std::exp(log_mpz(rho.at(n).get_num()) + n * std::log(static_cast<long double>(w)));
    if (best >= 0.0L && mag >= best) break;
    best = mag;
    out.truncation = n;
    sum += (n % 2 == 1 ? 1.0L : -1.0L) * mag;
  }
  out.value = static_cast<double>(sum);
  out.smallest_term = static_cast<double>(best);
  return out;
}

double gamma_generating(const SeriesCoefficients& gamma, double lambda) {
  if (gamma.kind != SeriesKind::gamma) throw std::invalid_argument("gamma_generating: need gamma coefficients");
  mpf_class sum(0, 256), pw(1, 256);
  const mpf_class lam(lambda, 256);
  for (std::size_t n = 1; n <= gamma.last_index; ++n) {
    pw *= lam;
    sum += mpf_class(gamma.at(n), 256) * pw;
  }
  return sum.get_d();
}

}  // namespace snake
