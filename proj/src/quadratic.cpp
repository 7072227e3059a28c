#include "fzkit/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fzkit/errors.hpp"

namespace fzkit {

QuadraticNumber::QuadraticNumber(Rational a, Rational b, long d) : a_(std::move(a)), b_(std::move(b)), d_(d) {
  if (b_ == 0) d_ = 0;
  else if (d_ < 2) throw PreconditionFailed("radicand must be a squarefree integer > 1");
}

long QuadraticNumber::common_radicand(const QuadraticNumber& x, const QuadraticNumber& y) {
  long dx = x.radicand(), dy = y.radicand();
  if (dx == 0) return dy;
  if (dy == 0 || dx == dy) return dx;
  throw PreconditionFailed("mixing sqrt(" + std::to_string(dx) + ") and sqrt(" + std::to_string(dy) + ")");
}

QuadraticNumber QuadraticNumber::conjugate() const { return QuadraticNumber(a_, -b_, d_); }

Rational QuadraticNumber::norm() const { return a_ * a_ - Rational(d_) * b_ * b_; }

int QuadraticNumber::sign() const {
  int sa = a_.sign(), sb = radicand() == 0 ? 0 : b_.sign();
  if (sb == 0) return sa;
  if (sa == 0 || sa == sb) return sb;
  return a_ * a_ > Rational(d_) * b_ * b_ ? sa : sb;
}

double QuadraticNumber::to_double() const {
  double a = a_.convert_to<double>();
  if (radicand() == 0) return a;
  return a + b_.convert_to<double>() * std::sqrt(static_cast<double>(d_));
}

std::string QuadraticNumber::str() const {
  std::ostringstream os;
  if (radicand() == 0) {
    os << a_;
    return os.str();
  }
  if (a_ != 0) os << a_ << (b_ < 0 ? " - " : " + ");
  else if (b_ < 0) os << "-";
  Rational b = abs(b_);
  if (b != 1) os << b << "*";
  os << "sqrt(" << d_ << ")";
  return os.str();
}

QuadraticNumber operator+(const QuadraticNumber& x, const QuadraticNumber& y) {
  long d = QuadraticNumber::common_radicand(x, y);
  return QuadraticNumber(x.a_ + y.a_, x.b_ + y.b_, d);
}

QuadraticNumber operator-(const QuadraticNumber& x, const QuadraticNumber& y) { return x + (-y); }

QuadraticNumber operator*(const QuadraticNumber& x, const QuadraticNumber& y) {
  long d = QuadraticNumber::common_radicand(x, y);
  return QuadraticNumber(x.a_ * y.a_ + Rational(d) * x.b_ * y.b_, x.a_ * y.b_ + x.b_ * y.a_, d);
}

QuadraticNumber operator/(const QuadraticNumber& x, const QuadraticNumber& y) {
  Rational n = y.norm();
  if (n == 0) throw PreconditionFailed("division by zero");
  QuadraticNumber t = x * y.conjugate();
  return QuadraticNumber(t.a_ / n, t.b_ / n, t.radicand());
}

QuadraticNumber pow(const QuadraticNumber& x, int k) {
  QuadraticNumber base = k < 0 ? QuadraticNumber(1) / x : x, out(1);
  for (unsigned n = static_cast<unsigned>(std::abs(k)); n; n >>= 1) {
    if (n & 1u) out = out * base;
    base = base * base;
  }
  return out;
}

Real Real::floating(double v) {
  Real r;
  r.exact_.reset();
  r.approx_ = v;
  return r;
}

const QuadraticNumber& Real::exact() const {
  if (!exact_) throw PreconditionFailed("value is floating point");
  return *exact_;
}

std::string Real::str() const {
  if (exact_) return exact_->str();
  std::ostringstream os;
  os.precision(17);
  os << approx_;
  return os.str();
}

Real operator+(const Real& x, const Real& y) {
  if (x.exact_ && y.exact_) return Real(*x.exact_ + *y.exact_);
  return Real::floating(x.approx_ + y.approx_);
}

Real operator-(const Real& x, const Real& y) {
  if (x.exact_ && y.exact_) return Real(*x.exact_ - *y.exact_);
  return Real::floating(x.approx_ - y.approx_);
}

Real operator*(const Real& x, const Real& y) {
  if (x.exact_ && y.exact_) return Real(*x.exact_ * *y.exact_);
  return Real::floating(x.approx_ * y.approx_);
}

Real operator/(const Real& x, const Real& y) {
  if (x.exact_ && y.exact_) return Real(*x.exact_ / *y.exact_);
  return Real::floating(x.approx_ / y.approx_);
}

bool operator<(const Real& x, const Real& y) {
  if (x.exact_ && y.exact_) return *x.exact_ < *y.exact_;
  return x.approx_ < y.approx_;
}

bool agree(const Real& x, const Real& y, double rel) {
  if (x.is_exact() && y.is_exact()) return x.exact() == y.exact();
  double a = x.to_double(), b = y.to_double();
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + 1e-300;
}

Real pow(const Real& x, int k) {
  if (x.is_exact()) return Real(pow(x.exact(), k));
  return Real::floating(std::pow(x.to_double(), k));
}

}  // namespace fzkit
