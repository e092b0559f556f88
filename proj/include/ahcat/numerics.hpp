#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace ahcat {

using Real = boost::multiprecision::mpfr_float;
using Rational = boost::multiprecision::cpp_rational;
using cplx = std::complex<double>;

/// Error raised for malformed input files and inconsistent shapes (CLI exit 2).
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Error raised when a verification step fails (CLI exit 1).
struct VerificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Element a + b*sqrt(17) of Q(sqrt 17).
struct QSqrt17 {
  Rational a{0}, b{0};

  QSqrt17() = default;
  QSqrt17(Rational a_, Rational b_) : a(std::move(a_)), b(std::move(b_)) {}

  QSqrt17 operator+(const QSqrt17& o) const { return {a + o.a, b + o.b}; }
  QSqrt17 operator-(const QSqrt17& o) const { return {a - o.a, b - o.b}; }
  QSqrt17 operator*(const QSqrt17& o) const { return {a * o.a + 17 * b * o.b, a * o.b + b * o.a}; }
  QSqrt17 operator/(const QSqrt17& o) const;
  bool operator==(const QSqrt17& o) const { return a == o.a && b == o.b; }
  bool is_zero() const { return a == 0 && b == 0; }
  Real to_real() const;
  std::string str() const;
};

/// Square root inside the field when one exists; `positive` selects the branch.
std::optional<QSqrt17> field_sqrt(const QSqrt17& q, bool positive = true);

/// Real number carrying a high-precision value and, for pure radicals, its exact square.
class Scalar {
 public:
  Scalar() : value_(0) {}
  Scalar(int v);
  Scalar(double v) : value_(v) {}
  explicit Scalar(const Real& v) : value_(v) {}

  /// Value sign*sqrt(sq); the square is kept exactly.
  static Scalar from_square(const QSqrt17& sq, int sign = 1);
  /// Value equal to the field element itself.
  static Scalar from_field(const QSqrt17& v);

  const Real& value() const { return value_; }
  const std::optional<QSqrt17>& exact_square() const { return exact_sq_; }
  int sign() const { return value_ > 0 ? 1 : (value_ < 0 ? -1 : 0); }
  double to_double() const { return value_.convert_to<double>(); }
  std::string str(int digits = 20) const;

  Scalar operator-() const;
  friend Scalar operator+(const Scalar& x, const Scalar& y);
  friend Scalar operator-(const Scalar& x, const Scalar& y);
  friend Scalar operator*(const Scalar& x, const Scalar& y);
  friend Scalar operator/(const Scalar& x, const Scalar& y);
  friend Scalar sqrt(const Scalar& x);

 private:
  Real value_;
  std::optional<QSqrt17> exact_sq_;
};

struct TolerancePolicy {
  double eq_tol = 1e-9;
  double solver_tol = 1e-12;
  int precision_digits = 50;

  /// Throws std::invalid_argument when the invariants are violated.
  void validate() const;
  /// Defaults with AHCAT_PRECISION applied when set.
  static TolerancePolicy from_env();
};

/// Sets the working precision of newly created reals (decimal digits).
void set_precision(int digits);
int precision();

enum class ConstantName { beta, beta_n, beta_prime_n, gamma, gamma_prime, sqrt2, index_AH, index_AHp1 };

Scalar ah_constant(ConstantName name, int n = 0);
/// Same lookup by the textual names used in data files and on the CLI.
Scalar ah_constant(const std::string& name, int n = 0);

bool approx_eq(const Scalar& a, const Scalar& b, const TolerancePolicy& pol);

/// Evaluates an expression over the tokens beta, beta1, beta2, beta-1, gamma, sqrt2,
/// decimal literals, sqrt(...), + - * / and parentheses.
Scalar parse_expression(const std::string& text);

/// Shortest decimal string that round-trips a double.
std::string format_double(double v);

}  // namespace ahcat
