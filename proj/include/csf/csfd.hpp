#pragma once

// Complex-step scalar types. First derivatives ride in a single imaginary
// channel; second derivatives in the im12 channel of a bicomplex number.
// All products are truncated so each channel only receives terms whose
// perturbation orders sum to exactly that channel's order; the real channel
// is therefore bit-identical to an all-double evaluation.

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace csf {

inline constexpr double kDefaultStep = 1e-8;

// Validated imaginary perturbation magnitude. Subtraction-free evaluation
// means h can sit far below the sqrt(eps) floor of finite differences.
struct StepSize {
  double h = kDefaultStep;

  constexpr StepSize() = default;
  explicit StepSize(double step) : h(step) {
    if (!(step > 0.0) || step > 1e-6)
      throw std::invalid_argument("StepSize: step must satisfy 0 < h <= 1e-6");
  }
};

// ---------------------------------------------------------------------------
// First-order scalar: x + i*h*dx/dseed, with i^2 terms dropped.
// ---------------------------------------------------------------------------
struct Complex {
  double re = 0.0;
  double im = 0.0;

  constexpr Complex() = default;
  constexpr Complex(double r) : re(r) {}
  constexpr Complex(double r, double i) : re(r), im(i) {}

  constexpr Complex operator-() const { return {-re, -im}; }
  constexpr Complex operator+() const { return *this; }

  friend constexpr Complex operator+(const Complex& a, const Complex& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend constexpr Complex operator-(const Complex& a, const Complex& b) {
    return {a.re - b.re, a.im - b.im};
  }
  // Truncated product: the i*i term (order 2) is discarded.
  friend constexpr Complex operator*(const Complex& a, const Complex& b) {
    return {a.re * b.re, a.re * b.im + a.im * b.re};
  }
  friend Complex operator/(const Complex& a, const Complex& b) {
    if (b.re == 0.0)
      throw std::domain_error("Complex division by zero real part");
    return {a.re / b.re, (a.im * b.re - a.re * b.im) / (b.re * b.re)};
  }

  Complex& operator+=(const Complex& o) { return *this = *this + o; }
  Complex& operator-=(const Complex& o) { return *this = *this - o; }
  Complex& operator*=(const Complex& o) { return *this = *this * o; }
  Complex& operator/=(const Complex& o) { return *this = *this / o; }

  // Control flow never sees imaginary parts: ordering is on re alone.
  friend constexpr bool operator<(const Complex& a, const Complex& b) { return a.re < b.re; }
  friend constexpr bool operator>(const Complex& a, const Complex& b) { return a.re > b.re; }
  friend constexpr bool operator<=(const Complex& a, const Complex& b) { return a.re <= b.re; }
  friend constexpr bool operator>=(const Complex& a, const Complex& b) { return a.re >= b.re; }
  friend constexpr bool operator==(const Complex& a, const Complex& b) { return a.re == b.re; }
  friend constexpr bool operator!=(const Complex& a, const Complex& b) { return a.re != b.re; }

  friend std::ostream& operator<<(std::ostream& os, const Complex& z) {
    return os << "(" << z.re << ", " << z.im << "i)";
  }
};

// ---------------------------------------------------------------------------
// Second-order scalar over two independent imaginary units i1, i2.
// im12 carries the mixed term; after two seeds of h each, im12/h^2 is a
// Hessian entry. Terms of total perturbation order >= 3 are dropped.
// ---------------------------------------------------------------------------
struct Bicomplex {
  double re = 0.0;
  double im1 = 0.0;
  double im2 = 0.0;
  double im12 = 0.0;

  constexpr Bicomplex() = default;
  constexpr Bicomplex(double r) : re(r) {}
  constexpr Bicomplex(double r, double i1, double i2, double i12)
      : re(r), im1(i1), im2(i2), im12(i12) {}

  constexpr Bicomplex operator-() const { return {-re, -im1, -im2, -im12}; }
  constexpr Bicomplex operator+() const { return *this; }

  friend constexpr Bicomplex operator+(const Bicomplex& a, const Bicomplex& b) {
    return {a.re + b.re, a.im1 + b.im1, a.im2 + b.im2, a.im12 + b.im12};
  }
  friend constexpr Bicomplex operator-(const Bicomplex& a, const Bicomplex& b) {
    return {a.re - b.re, a.im1 - b.im1, a.im2 - b.im2, a.im12 - b.im12};
  }
  friend constexpr Bicomplex operator*(const Bicomplex& a, const Bicomplex& b) {
    return {a.re * b.re,
            a.re * b.im1 + a.im1 * b.re,
            a.re * b.im2 + a.im2 * b.re,
            a.re * b.im12 + a.im12 * b.re + a.im1 * b.im2 + a.im2 * b.im1};
  }
  friend Bicomplex operator/(const Bicomplex& a, const Bicomplex& b) {
    if (b.re == 0.0)
      throw std::domain_error("Bicomplex division by zero real part");
    // re and im1/im2 use the exact operation order of the plain-double and
    // first-order paths, so those channels stay bit-identical to them.
    const double den = b.re * b.re;
    const double inv = 1.0 / b.re;
    const double inv2 = inv * inv;
    return {a.re / b.re,
            (a.im1 * b.re - a.re * b.im1) / den,
            (a.im2 * b.re - a.re * b.im2) / den,
            a.im12 * inv - (a.im1 * b.im2 + a.im2 * b.im1) * inv2 -
                a.re * b.im12 * inv2 + 2.0 * a.re * b.im1 * b.im2 * inv2 * inv};
  }

  Bicomplex& operator+=(const Bicomplex& o) { return *this = *this + o; }
  Bicomplex& operator-=(const Bicomplex& o) { return *this = *this - o; }
  Bicomplex& operator*=(const Bicomplex& o) { return *this = *this * o; }
  Bicomplex& operator/=(const Bicomplex& o) { return *this = *this / o; }

  friend constexpr bool operator<(const Bicomplex& a, const Bicomplex& b) { return a.re < b.re; }
  friend constexpr bool operator>(const Bicomplex& a, const Bicomplex& b) { return a.re > b.re; }
  friend constexpr bool operator<=(const Bicomplex& a, const Bicomplex& b) { return a.re <= b.re; }
  friend constexpr bool operator>=(const Bicomplex& a, const Bicomplex& b) { return a.re >= b.re; }
  friend constexpr bool operator==(const Bicomplex& a, const Bicomplex& b) { return a.re == b.re; }
  friend constexpr bool operator!=(const Bicomplex& a, const Bicomplex& b) { return a.re != b.re; }

  friend std::ostream& operator<<(std::ostream& os, const Bicomplex& z) {
    return os << "(" << z.re << ", " << z.im1 << "i1, " << z.im2 << "i2, "
              << z.im12 << "i1i2)";
  }
};

// ---------------------------------------------------------------------------
// Elementary functions. A smooth f lifts as
//   Complex:   f(z)  = ( f, f'*im )
//   Bicomplex: f(z)  = ( f, f'*im1, f'*im2, f'*im12 + f''*im1*im2 )
// with f, f', f'' evaluated at z.re.
// ---------------------------------------------------------------------------
namespace detail {
inline Complex lift(const Complex& z, double f, double d1) {
  return {f, d1 * z.im};
}
inline Bicomplex lift(const Bicomplex& z, double f, double d1, double d2) {
  return {f, d1 * z.im1, d1 * z.im2, d1 * z.im12 + d2 * z.im1 * z.im2};
}
}  // namespace detail

// double overloads so templated kernels instantiate for plain double too.
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double tan(double x) { return std::tan(x); }
inline double acos(double x) { return std::acos(x); }
inline double asin(double x) { return std::asin(x); }
inline double abs(double x) { return std::fabs(x); }
inline double abs2(double x) { return x * x; }
inline double floor(double x) { return std::floor(x); }
inline double pow(double x, double p) { return std::pow(x, p); }
inline constexpr double conj(double x) { return x; }
inline constexpr double real_part(double x) { return x; }
inline bool isfinite(double x) { return std::isfinite(x); }

inline Complex exp(const Complex& z) {
  const double f = std::exp(z.re);
  return detail::lift(z, f, f);
}
inline Complex log(const Complex& z) {
  if (!(z.re > 0.0)) throw std::domain_error("log of non-positive real part");
  return detail::lift(z, std::log(z.re), 1.0 / z.re);
}
inline Complex sqrt(const Complex& z) {
  if (z.re < 0.0) throw std::domain_error("sqrt of negative real part");
  const double f = std::sqrt(z.re);
  return detail::lift(z, f, 0.5 / f);
}
inline Complex sin(const Complex& z) { return detail::lift(z, std::sin(z.re), std::cos(z.re)); }
inline Complex cos(const Complex& z) { return detail::lift(z, std::cos(z.re), -std::sin(z.re)); }
inline Complex tan(const Complex& z) {
  const double c = std::cos(z.re);
  return detail::lift(z, std::tan(z.re), 1.0 / (c * c));
}
inline Complex acos(const Complex& z) {
  if (z.re < -1.0 || z.re > 1.0)
    throw std::domain_error("acos argument outside [-1, 1]");
  return detail::lift(z, std::acos(z.re), -1.0 / std::sqrt(1.0 - z.re * z.re));
}
inline Complex asin(const Complex& z) {
  if (z.re < -1.0 || z.re > 1.0)
    throw std::domain_error("asin argument outside [-1, 1]");
  return detail::lift(z, std::asin(z.re), 1.0 / std::sqrt(1.0 - z.re * z.re));
}
inline Complex pow(const Complex& z, double p) {
  return detail::lift(z, std::pow(z.re, p), p * std::pow(z.re, p - 1.0));
}
inline constexpr Complex conj(const Complex& z) { return z; }
inline constexpr double real_part(const Complex& z) { return z.re; }
inline bool isfinite(const Complex& z) {
  return std::isfinite(z.re) && std::isfinite(z.im);
}

inline Bicomplex exp(const Bicomplex& z) {
  const double f = std::exp(z.re);
  return detail::lift(z, f, f, f);
}
inline Bicomplex log(const Bicomplex& z) {
  if (!(z.re > 0.0)) throw std::domain_error("log of non-positive real part");
  const double inv = 1.0 / z.re;
  return detail::lift(z, std::log(z.re), inv, -inv * inv);
}
inline Bicomplex sqrt(const Bicomplex& z) {
  if (z.re < 0.0) throw std::domain_error("sqrt of negative real part");
  const double f = std::sqrt(z.re);
  const double d1 = 0.5 / f;
  return detail::lift(z, f, d1, -0.5 * d1 / z.re);
}
inline Bicomplex sin(const Bicomplex& z) {
  const double s = std::sin(z.re), c = std::cos(z.re);
  return detail::lift(z, s, c, -s);
}
inline Bicomplex cos(const Bicomplex& z) {
  const double s = std::sin(z.re), c = std::cos(z.re);
  return detail::lift(z, c, -s, -c);
}
inline Bicomplex tan(const Bicomplex& z) {
  const double t = std::tan(z.re);
  const double sec2 = 1.0 + t * t;
  return detail::lift(z, t, sec2, 2.0 * t * sec2);
}
inline Bicomplex acos(const Bicomplex& z) {
  if (z.re < -1.0 || z.re > 1.0)
    throw std::domain_error("acos argument outside [-1, 1]");
  const double u = 1.0 - z.re * z.re;
  const double d1 = -1.0 / std::sqrt(u);
  return detail::lift(z, std::acos(z.re), d1, d1 * z.re / u);
}
inline Bicomplex asin(const Bicomplex& z) {
  if (z.re < -1.0 || z.re > 1.0)
    throw std::domain_error("asin argument outside [-1, 1]");
  const double u = 1.0 - z.re * z.re;
  const double d1 = 1.0 / std::sqrt(u);
  return detail::lift(z, std::asin(z.re), d1, d1 * z.re / u);
}
inline Bicomplex pow(const Bicomplex& z, double p) {
  return detail::lift(z, std::pow(z.re, p), p * std::pow(z.re, p - 1.0),
                      p * (p - 1.0) * std::pow(z.re, p - 2.0));
}
inline constexpr Bicomplex conj(const Bicomplex& z) { return z; }
inline constexpr double real_part(const Bicomplex& z) { return z.re; }
inline bool isfinite(const Bicomplex& z) {
  return std::isfinite(z.re) && std::isfinite(z.im1) && std::isfinite(z.im2) &&
         std::isfinite(z.im12);
}

// abs2 feeds Eigen's squaredNorm; it must stay in the lifted type so
// derivatives of norms keep flowing.
inline constexpr Complex abs2(const Complex& z) { return z * z; }
inline constexpr Bicomplex abs2(const Bicomplex& z) { return z * z; }

// |x|: sign decided by the real part; at exactly zero the positive branch
// is kept so derivative channels pass through unchanged.
inline constexpr Complex abs(const Complex& z) { return z.re < 0.0 ? -z : z; }
inline constexpr Bicomplex abs(const Bicomplex& z) { return z.re < 0.0 ? -z : z; }

// Piecewise-constant: derivative channels vanish almost everywhere.
inline Complex floor(const Complex& z) { return Complex(std::floor(z.re)); }
inline Bicomplex floor(const Bicomplex& z) { return Bicomplex(std::floor(z.re)); }

// Selection keeps the whole winning operand (channels included); ties keep
// the first argument.
template <typename S>
constexpr S min(const S& a, const S& b) { return b < a ? b : a; }
template <typename S>
constexpr S max(const S& a, const S& b) { return b > a ? b : a; }
template <typename S>
constexpr S clamp(const S& x, double lo, double hi) {
  return max(min(x, S(hi)), S(lo));
}

inline int ifloor(double x) { return static_cast<int>(std::floor(x)); }
inline int ifloor(const Complex& z) { return ifloor(z.re); }
inline int ifloor(const Bicomplex& z) { return ifloor(z.re); }

// ---------------------------------------------------------------------------
// Seeding and extraction.
// ---------------------------------------------------------------------------
inline Complex promote(double x, const StepSize& s) {
  if (!std::isfinite(x))
    throw std::invalid_argument("promote: non-finite real value");
  return {x, s.h};
}

inline Bicomplex promote2(double x, const StepSize& s, bool seed1, bool seed2) {
  if (!std::isfinite(x))
    throw std::invalid_argument("promote2: non-finite real value");
  return {x, seed1 ? s.h : 0.0, seed2 ? s.h : 0.0, 0.0};
}

inline double extract_derivative(const Complex& z, const StepSize& s) {
  return z.im / s.h;
}
inline double extract_derivative1(const Bicomplex& z, const StepSize& s) {
  return z.im1 / s.h;
}
inline double extract_derivative2(const Bicomplex& z, const StepSize& s) {
  return z.im2 / s.h;
}
inline double extract_hessian(const Bicomplex& z, const StepSize& s) {
  return z.im12 / (s.h * s.h);
}

// Re-lift a measured quantity that may itself carry a first-order channel.
// Second-order passes perturb the pose only, so the channel is dropped there.
template <typename S>
S lift_measurement(const Complex& d);
template <>
inline double lift_measurement<double>(const Complex& d) { return d.re; }
template <>
inline Complex lift_measurement<Complex>(const Complex& d) { return d; }
template <>
inline Bicomplex lift_measurement<Bicomplex>(const Complex& d) {
  return Bicomplex(d.re);
}

}  // namespace csf

// ---------------------------------------------------------------------------
// Eigen integration: both scalars behave as real (no conjugation anywhere).
// ---------------------------------------------------------------------------
#include <Eigen/Core>
#include <Eigen/Geometry>

namespace Eigen {

template <>
struct NumTraits<csf::Complex> : GenericNumTraits<csf::Complex> {
  typedef csf::Complex Real;
  typedef csf::Complex NonInteger;
  typedef csf::Complex Nested;
  typedef csf::Complex Literal;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 2,
    MulCost = 4
  };
  static inline Real epsilon() {
    return Real(std::numeric_limits<double>::epsilon());
  }
  static inline Real dummy_precision() { return Real(1e-12); }
  static inline Real highest() {
    return Real(std::numeric_limits<double>::max());
  }
  static inline Real lowest() {
    return Real(std::numeric_limits<double>::lowest());
  }
  static inline int digits10() { return std::numeric_limits<double>::digits10; }
};

template <>
struct NumTraits<csf::Bicomplex> : GenericNumTraits<csf::Bicomplex> {
  typedef csf::Bicomplex Real;
  typedef csf::Bicomplex NonInteger;
  typedef csf::Bicomplex Nested;
  typedef csf::Bicomplex Literal;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 4,
    AddCost = 4,
    MulCost = 9
  };
  static inline Real epsilon() {
    return Real(std::numeric_limits<double>::epsilon());
  }
  static inline Real dummy_precision() { return Real(1e-12); }
  static inline Real highest() {
    return Real(std::numeric_limits<double>::max());
  }
  static inline Real lowest() {
    return Real(std::numeric_limits<double>::lowest());
  }
  static inline int digits10() { return std::numeric_limits<double>::digits10; }
};

template <typename BinaryOp>
struct ScalarBinaryOpTraits<csf::Complex, double, BinaryOp> {
  typedef csf::Complex ReturnType;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, csf::Complex, BinaryOp> {
  typedef csf::Complex ReturnType;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<csf::Bicomplex, double, BinaryOp> {
  typedef csf::Bicomplex ReturnType;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, csf::Bicomplex, BinaryOp> {
  typedef csf::Bicomplex ReturnType;
};

}  // namespace Eigen

namespace csf {

// Fixed-size Eigen aliases used across the toolkit.
template <typename S>
using Vec2 = Eigen::Matrix<S, 2, 1>;
template <typename S>
using Vec3 = Eigen::Matrix<S, 3, 1>;
template <typename S>
using Vec4 = Eigen::Matrix<S, 4, 1>;
template <typename S>
using Vec6 = Eigen::Matrix<S, 6, 1>;
template <typename S>
using Mat3 = Eigen::Matrix<S, 3, 3>;
template <typename S>
using Mat4 = Eigen::Matrix<S, 4, 4>;
template <typename S>
using Mat6 = Eigen::Matrix<S, 6, 6>;

using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;
using Vec6d = Vec6<double>;
using Mat3d = Mat3<double>;
using Mat4d = Mat4<double>;
using Mat6d = Mat6<double>;

template <typename S>
Vec3d real_part(const Vec3<S>& v) {
  return {real_part(v.x()), real_part(v.y()), real_part(v.z())};
}

}  // namespace csf
