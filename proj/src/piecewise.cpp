#include "snake/piecewise.hpp"

#include <algorithm>
#include <stdexcept>

namespace snake {

mpq_class poly_eval(const std::vector<mpq_class>& c, const mpq_class& t) {
  mpq_class v = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
  return v;
}

std::vector<mpq_class> poly_mul(const std::vector<mpq_class>& a, const std::vector<mpq_class>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<mpq_class> c(a.size() + b.size() - 1, mpq_class(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

std::vector<mpq_class> poly_add(const std::vector<mpq_class>& a, const std::vector<mpq_class>& b) {
  std::vector<mpq_class> c(std::max(a.size(), b.size()), mpq_class(0));
  for (std::size_t i = 0; i < a.size(); ++i) c[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) c[i] += b[i];
  return c;
}

std::vector<mpq_class> poly_reflect(const std::vector<mpq_class>& c, const mpq_class& T) {
  // (T - t)^j by repeated multiplication
  std::vector<mpq_class> out(c.size(), mpq_class(0));
  std::vector<mpq_class> pw{mpq_class(1)};
  const std::vector<mpq_class> lin{T, mpq_class(-1)};
  for (std::size_t j = 0; j < c.size(); ++j) {
    for (std::size_t k = 0; k < pw.size(); ++k) out[k] += c[j] * pw[k];
    pw = poly_mul(pw, lin);
  }
  return out;
}

PiecewisePolynomial::PiecewisePolynomial(std::vector<mpq_class> breakpoints,
                                         std::vector<std::vector<mpq_class>> pieces)
    : breaks_(std::move(breakpoints)), pieces_(std::move(pieces)) {
  if (breaks_.size() < 2 || pieces_.size() + 1 != breaks_.size())
    throw std::invalid_argument("PiecewisePolynomial: need K+1 breakpoints for K pieces");
  for (std::size_t k = 0; k + 1 < breaks_.size(); ++k)
    if (!(breaks_[k] < breaks_[k + 1])) throw std::invalid_argument("PiecewisePolynomial: breakpoints must increase");
}

PiecewisePolynomial PiecewisePolynomial::constant(const mpq_class& lo, const mpq_class& hi, const mpq_class& c) {
  return PiecewisePolynomial({lo, hi}, {{c}});
}

PiecewisePolynomial PiecewisePolynomial::indicator(const mpq_class& a, const mpq_class& hi) {
  if (a <= 0) return constant(0, hi, 0);
  if (a >= hi) return constant(0, hi, 1);
  return PiecewisePolynomial({mpq_class(0), a, hi}, {{mpq_class(1)}, {mpq_class(0)}});
}

mpq_class PiecewisePolynomial::operator()(const mpq_class& t) const {
  if (t < breaks_.front() || t > breaks_.back()) throw std::out_of_range("PiecewisePolynomial: outside domain");
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  std::size_t k = static_cast<std::size_t>(it - breaks_.begin());
  k = k == 0 ? 0 : k - 1;
  k = std::min(k, pieces_.size() - 1);
  return poly_eval(pieces_[k], t);
}

double PiecewisePolynomial::eval(double t) const { return (*this)(mpq_class(t)).get_d(); }

PiecewisePolynomial PiecewisePolynomial::antiderivative() const {
  std::vector<std::vector<mpq_class>> out;
  mpq_class carry = 0;  // F(b_k)
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const auto& c = pieces_[k];
    std::vector<mpq_class> a(c.size() + 1, mpq_class(0));
    for (std::size_t j = 0; j < c.size(); ++j) a[j + 1] = c[j] / static_cast<long>(j + 1);
    a[0] = carry - poly_eval(a, breaks_[k]);
    carry = poly_eval(a, breaks_[k + 1]);
    out.push_back(std::move(a));
  }
  return PiecewisePolynomial(breaks_, std::move(out));
}

PiecewisePolynomial PiecewisePolynomial::reflect() const {
  const mpq_class T = breaks_.front() + breaks_.back();
  std::vector<mpq_class> b;
  std::vector<std::vector<mpq_class>> p;
  for (auto it = breaks_.rbegin(); it != breaks_.rend(); ++it) b.push_back(T - *it);
  for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) p.push_back(poly_reflect(*it, T));
  return PiecewisePolynomial(std::move(b), std::move(p));
}

PiecewisePolynomial PiecewisePolynomial::refine(const std::vector<mpq_class>& breaks) const {
  std::vector<mpq_class> all(breaks_);
  for (const auto& b : breaks)
    if (b > breaks_.front() && b < breaks_.back()) all.push_back(b);
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<std::vector<mpq_class>> p;
  std::size_t k = 0;
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    while (k + 1 < pieces_.size() && all[i] >= breaks_[k + 1]) ++k;
    p.push_back(pieces_[k]);
  }
  return PiecewisePolynomial(std::move(all), std::move(p));
}

PiecewisePolynomial operator*(const PiecewisePolynomial& a, const PiecewisePolynomial& b) {
  if (a.breaks_.front() != b.breaks_.front() || a.breaks_.back() != b.breaks_.back())
    throw std::invalid_argument("PiecewisePolynomial: domains differ");
  const auto ra = a.refine(b.breaks_), rb = b.refine(a.breaks_);
  std::vector<std::vector<mpq_class>> p;
  for (std::size_t k = 0; k < ra.pieces_.size(); ++k) p.push_back(poly_mul(ra.pieces_[k], rb.pieces_[k]));
  return PiecewisePolynomial(ra.breaks_, std::move(p));
}

PiecewisePolynomial operator+(const PiecewisePolynomial& a, const PiecewisePolynomial& b) {
  if (a.breaks_.front() != b.breaks_.front() || a.breaks_.back() != b.breaks_.back())
    throw std::invalid_argument("PiecewisePolynomial: domains differ");
  const auto ra = a.refine(b.breaks_), rb = b.refine(a.breaks_);
  std::vector<std::vector<mpq_class>> p;
  for (std::size_t k = 0; k < ra.pieces_.size(); ++k) p.push_back(poly_add(ra.pieces_[k], rb.pieces_[k]));
  return PiecewisePolynomial(ra.breaks_, std::move(p));
}

PiecewisePolynomial PiecewisePolynomial::scaled(const mpq_class& c) const {
  PiecewisePolynomial out = *this;
  for (auto& piece : out.pieces_)
    for (auto& x : piece) x *= c;
  return out;
}

bool PiecewisePolynomial::is_zero() const {
  for (const auto& piece : pieces_)
    for (const auto& x : piece)
      if (x != 0) return false;
  return true;
}

bool PiecewisePolynomial::continuous() const {
  for (std::size_t k = 0; k + 1 < pieces_.size(); ++k)
    if (poly_eval(pieces_[k], breaks_[k + 1]) != poly_eval(pieces_[k + 1], breaks_[k + 1])) return false;
  return true;
}

}  // namespace snake
