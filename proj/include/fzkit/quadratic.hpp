#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <string>

namespace fzkit {

using Rational = boost::multiprecision::cpp_rational;

// a + b sqrt(d) with d squarefree and > 1, or d = 0 for plain rationals.
class QuadraticNumber {
 public:
  QuadraticNumber() = default;
  QuadraticNumber(Rational a) : a_(std::move(a)) {}  // NOLINT: rationals embed
  QuadraticNumber(long a) : a_(a) {}                 // NOLINT
  QuadraticNumber(Rational a, Rational b, long d);

  const Rational& rational_part() const { return a_; }
  const Rational& surd_part() const { return b_; }
  long radicand() const { return b_ == 0 ? 0 : d_; }

  QuadraticNumber conjugate() const;
  Rational norm() const;  // a^2 - d b^2
  int sign() const;
  double to_double() const;
  std::string str() const;

  friend QuadraticNumber operator+(const QuadraticNumber& x, const QuadraticNumber& y);
  friend QuadraticNumber operator-(const QuadraticNumber& x, const QuadraticNumber& y);
  friend QuadraticNumber operator*(const QuadraticNumber& x, const QuadraticNumber& y);
  friend QuadraticNumber operator/(const QuadraticNumber& x, const QuadraticNumber& y);
  QuadraticNumber operator-() const { return QuadraticNumber(-a_, -b_, d_); }
  QuadraticNumber& operator+=(const QuadraticNumber& y) { return *this = *this + y; }
  QuadraticNumber& operator*=(const QuadraticNumber& y) { return *this = *this * y; }

  friend bool operator==(const QuadraticNumber& x, const QuadraticNumber& y) { return (x - y).sign() == 0; }
  friend bool operator<(const QuadraticNumber& x, const QuadraticNumber& y) { return (x - y).sign() < 0; }

 private:
  static long common_radicand(const QuadraticNumber& x, const QuadraticNumber& y);
  Rational a_ = 0, b_ = 0;
  long d_ = 0;
};

QuadraticNumber pow(const QuadraticNumber& x, int k);  // k may be negative

// Exact quadratic number or a double; arithmetic on two exact values stays exact.
class Real {
 public:
  Real() : exact_(QuadraticNumber()) {}
  Real(QuadraticNumber q) : exact_(std::move(q)), approx_(exact_->to_double()) {}  // NOLINT
  Real(long v) : Real(QuadraticNumber(v)) {}                                      // NOLINT
  static Real floating(double v);

  bool is_exact() const { return exact_.has_value(); }
  const QuadraticNumber& exact() const;
  double to_double() const { return approx_; }
  std::string str() const;

  friend Real operator+(const Real& x, const Real& y);
  friend Real operator-(const Real& x, const Real& y);
  friend Real operator*(const Real& x, const Real& y);
  friend Real operator/(const Real& x, const Real& y);
  Real& operator+=(const Real& y) { return *this = *this + y; }
  Real& operator*=(const Real& y) { return *this = *this * y; }
  friend bool operator<(const Real& x, const Real& y);

 private:
  std::optional<QuadraticNumber> exact_;
  double approx_ = 0;
};

// Exact equality when both are exact, relative tolerance otherwise.
bool agree(const Real& x, const Real& y, double rel = 1e-9);
Real pow(const Real& x, int k);

}  // namespace fzkit
