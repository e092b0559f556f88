#include "ahcat/numerics.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

namespace ahcat {

namespace {

using boost::multiprecision::cpp_int;

Real rational_to_real(const Rational& r) {
  Real n(boost::multiprecision::numerator(r).str());
  Real d(boost::multiprecision::denominator(r).str());
  return n / d;
}

std::optional<Rational> rational_sqrt(const Rational& r) {
  if (r < 0) return std::nullopt;
  cpp_int n = boost::multiprecision::numerator(r), d = boost::multiprecision::denominator(r);
  cpp_int sn = boost::multiprecision::sqrt(n), sd = boost::multiprecision::sqrt(d);
  if (sn * sn != n || sd * sd != d) return std::nullopt;
  return Rational(sn, sd);
}

struct PrecisionInit {
  PrecisionInit() { Real::default_precision(50); }
} precision_init;

}  // namespace

QSqrt17 QSqrt17::operator/(const QSqrt17& o) const {
  Rational n = o.a * o.a - 17 * o.b * o.b;
  if (n == 0) throw std::domain_error("division by zero in Q(sqrt17)");
  QSqrt17 conj{o.a, -o.b};
  QSqrt17 p = (*this) * conj;
  return {p.a / n, p.b / n};
}

Real QSqrt17::to_real() const { return rational_to_real(a) + rational_to_real(b) * sqrt(Real(17)); }

std::string QSqrt17::str() const {
  std::ostringstream os;
  os << a.str() << (b < 0 ? " - " : " + ") << Rational(abs(b)).str() << "*sqrt17";
  return os.str();
}

std::optional<QSqrt17> field_sqrt(const QSqrt17& q, bool positive) {
  std::optional<QSqrt17> out;
  if (q.b == 0) {
    if (auto p = rational_sqrt(q.a)) out = QSqrt17{*p, 0};
    else if (auto r = rational_sqrt(q.a / 17)) out = QSqrt17{0, *r};
  } else if (auto disc = rational_sqrt(q.a * q.a - 17 * q.b * q.b)) {
    for (int s : {1, -1}) {
      Rational p2 = (q.a + s * (*disc)) / 2;
      if (p2 <= 0) continue;
      if (auto p = rational_sqrt(p2)) {
        out = QSqrt17{*p, q.b / (2 * (*p))};
        break;
      }
    }
  }
  if (!out) return out;
  bool neg = out->to_real() < 0;
  if (neg == positive) out = QSqrt17{-out->a, -out->b};
  return out;
}

Scalar::Scalar(int v) : value_(v) {
  exact_sq_ = QSqrt17{Rational(v) * v, 0};
}

Scalar Scalar::from_square(const QSqrt17& sq, int sign) {
  Scalar s;
  Real v = sq.to_real();
  if (v < 0) throw std::domain_error("negative square");
  s.value_ = sqrt(v);
  if (sign < 0) s.value_ = -s.value_;
  s.exact_sq_ = sq;
  return s;
}

Scalar Scalar::from_field(const QSqrt17& v) {
  Scalar s;
  s.value_ = v.to_real();
  s.exact_sq_ = v * v;
  return s;
}

std::string Scalar::str(int digits) const { return value_.str(digits); }

Scalar Scalar::operator-() const {
  Scalar s(*this);
  s.value_ = -value_;
  return s;
}

Scalar operator+(const Scalar& x, const Scalar& y) { return Scalar(Real(x.value_ + y.value_)); }
Scalar operator-(const Scalar& x, const Scalar& y) { return Scalar(Real(x.value_ - y.value_)); }

Scalar operator*(const Scalar& x, const Scalar& y) {
  Scalar s(Real(x.value_ * y.value_));
  if (x.exact_sq_ && y.exact_sq_) s.exact_sq_ = (*x.exact_sq_) * (*y.exact_sq_);
  return s;
}

Scalar operator/(const Scalar& x, const Scalar& y) {
  if (y.value_ == 0) throw std::domain_error("division by zero");
  Scalar s(Real(x.value_ / y.value_));
  if (x.exact_sq_ && y.exact_sq_) s.exact_sq_ = (*x.exact_sq_) / (*y.exact_sq_);
  return s;
}

Scalar sqrt(const Scalar& x) {
  if (x.value_ < 0) throw std::domain_error("sqrt of negative scalar");
  Scalar s(Real(sqrt(x.value_)));
  if (x.exact_sq_) {
    if (auto v = field_sqrt(*x.exact_sq_, true)) s.exact_sq_ = *v;
  }
  return s;
}

void TolerancePolicy::validate() const {
  if (!(eq_tol > 0) || !(solver_tol > 0)) throw std::invalid_argument("tolerances must be positive");
  if (solver_tol > eq_tol) throw std::invalid_argument("solver_tol must not exceed eq_tol");
  if (precision_digits < 30) throw std::invalid_argument("precision_digits must be at least 30");
}

TolerancePolicy TolerancePolicy::from_env() {
  TolerancePolicy p;
  if (const char* env = std::getenv("AHCAT_PRECISION")) {
    int d = std::atoi(env);
    if (d > 0) p.precision_digits = d;
  }
  p.validate();
  return p;
}

void set_precision(int digits) { Real::default_precision(digits); }
int precision() { return static_cast<int>(Real::default_precision()); }

namespace {
// beta^2 = (5 + sqrt17)/2
QSqrt17 beta_sq() { return {Rational(5, 2), Rational(1, 2)}; }
}  // namespace

Scalar ah_constant(ConstantName name, int n) {
  switch (name) {
    case ConstantName::beta:
      return Scalar::from_square(beta_sq());
    case ConstantName::beta_n:
      if (n != -1 && n != 1 && n != 2) throw std::invalid_argument("beta_n defined for n in {-1,1,2}");
      return Scalar::from_square(beta_sq() - QSqrt17{n, 0});
    case ConstantName::beta_prime_n:
      if (n != -1 && n != 1 && n != 2) throw std::invalid_argument("beta_prime_n defined for n in {-1,1,2}");
      return Scalar::from_field(beta_sq() - QSqrt17{n, 0});
    case ConstantName::gamma:
      return Scalar::from_square(QSqrt17{2, 0} * beta_sq() - QSqrt17{1, 0});
    case ConstantName::gamma_prime:
      return Scalar::from_field(QSqrt17{2, 0} * beta_sq() - QSqrt17{1, 0});
    case ConstantName::sqrt2:
      return Scalar::from_square(QSqrt17{2, 0});
    case ConstantName::index_AH:
      return Scalar::from_field(beta_sq());
    case ConstantName::index_AHp1:
      return Scalar::from_field(beta_sq() + QSqrt17{1, 0});
  }
  throw std::invalid_argument("unknown constant");
}

Scalar ah_constant(const std::string& name, int n) {
  if (name == "beta") return ah_constant(ConstantName::beta);
  if (name == "beta_n") return ah_constant(ConstantName::beta_n, n);
  if (name == "beta_prime_n") return ah_constant(ConstantName::beta_prime_n, n);
  if (name == "gamma") return ah_constant(ConstantName::gamma);
  if (name == "gamma_prime") return ah_constant(ConstantName::gamma_prime);
  if (name == "sqrt2") return ah_constant(ConstantName::sqrt2);
  if (name == "index_AH") return ah_constant(ConstantName::index_AH);
  if (name == "index_AHp1") return ah_constant(ConstantName::index_AHp1);
  throw std::invalid_argument("unknown constant name: " + name);
}

bool approx_eq(const Scalar& a, const Scalar& b, const TolerancePolicy& pol) {
  if (a.exact_square() && b.exact_square()) return a.sign() == b.sign() && *a.exact_square() == *b.exact_square();
  Real d = abs(a.value() - b.value());
  return d <= Real(pol.eq_tol);
}

namespace {

class ExprParser {
 public:
  explicit ExprParser(const std::string& s) : s_(s) {}

  Scalar parse() {
    Scalar v = expr();
    skip();
    if (pos_ != s_.size()) fail("trailing characters");
    return v;
  }

 private:
  const std::string& s_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw StructuralError("bad expression '" + s_ + "': " + why + " at offset " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  Scalar expr() {
    Scalar v = term();
    for (;;) {
      if (eat('+')) v = v + term();
      else if (eat('-')) v = v - term();
      else return v;
    }
  }
  Scalar term() {
    Scalar v = unary();
    for (;;) {
      if (eat('*')) v = v * unary();
      else if (eat('/')) v = v / unary();
      else return v;
    }
  }
  Scalar unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return atom();
  }
  Scalar atom() {
    skip();
    if (eat('(')) {
      Scalar v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (pos_ >= s_.size()) fail("unexpected end");
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return ident();
    fail("unexpected character");
  }
  Scalar number() {
    size_t start = pos_;
    bool dot = false;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || (!dot && s_[pos_] == '.'))) {
      if (s_[pos_] == '.') dot = true;
      ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return Scalar(Real(s_.substr(start, pos_ - start)));
    }
    std::string lit = s_.substr(start, pos_ - start);
    if (!dot) return Scalar(std::stoi(lit));
    // exact decimal: digits / 10^k
    std::string digits = lit;
    size_t d = digits.find('.');
    size_t k = digits.size() - d - 1;
    digits.erase(d, 1);
    boost::multiprecision::cpp_int num(digits.empty() ? "0" : digits);
    boost::multiprecision::cpp_int den = boost::multiprecision::pow(boost::multiprecision::cpp_int(10), static_cast<unsigned>(k));
    return Scalar::from_field(QSqrt17{Rational(num, den), 0});
  }
  Scalar ident() {
    size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    std::string id = s_.substr(start, pos_ - start);
    if (id == "beta" && pos_ + 1 < s_.size() && s_[pos_] == '-' && s_[pos_ + 1] == '1') {
      pos_ += 2;
      return ah_constant(ConstantName::beta_n, -1);
    }
    if (id == "beta") return ah_constant(ConstantName::beta);
    if (id == "beta1") return ah_constant(ConstantName::beta_n, 1);
    if (id == "beta2") return ah_constant(ConstantName::beta_n, 2);
    if (id == "gamma") return ah_constant(ConstantName::gamma);
    if (id == "sqrt2") return ah_constant(ConstantName::sqrt2);
    if (id == "sqrt") {
      if (!eat('(')) fail("sqrt needs '('");
      Scalar v = expr();
      if (!eat(')')) fail("missing ')'");
      return sqrt(v);
    }
    fail("unknown token '" + id + "'");
  }
};

}  // namespace

Scalar parse_expression(const std::string& text) { return ExprParser(text).parse(); }

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace ahcat
