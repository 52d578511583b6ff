#include <cmath>
#include <numeric>
#include <vector>

#include "csf/csfd.hpp"
#include "csf/diff.hpp"
#include "doctest.h"
#include "oracles.hpp"

using csf::Bicomplex;
using csf::Complex;
using csf::StepSize;

namespace {

// A deliberately messy scalar pipeline exercising every operation class;
// instantiable for double / Complex / Bicomplex.
template <typename S>
S messy_pipeline(S x) {
  S a = csf::exp(csf::sin(x) * S(0.5)) + x * x / (S(1.0) + csf::abs(x));
  S b = csf::sqrt(a + S(2.0));
  S c = csf::min(b, a) + csf::max(b * S(0.25), a * a);
  S d = csf::clamp(c, -0.75, 3.5);
  return d / (S(1.0) + c * c) + csf::cos(a) * b;
}

// Same pipeline with a hand-derived first derivative is impractical; these
// smooth closed forms are the analytic oracles instead.
double g1(double x) { return std::exp(std::sin(x) * std::cos(x)); }
double g1p(double x) { return g1(x) * std::cos(2.0 * x); }
double g1pp(double x) {
  return g1p(x) * std::cos(2.0 * x) - 2.0 * g1(x) * std::sin(2.0 * x);
}

template <typename S>
S g1_lifted(S x) {
  return csf::exp(csf::sin(x) * csf::cos(x));
}

double g2(double x) { return std::sqrt(1.0 + x * x) / (2.0 + std::cos(x)); }
double g2p(double x) {
  const double r = std::sqrt(1.0 + x * x);
  const double d = 2.0 + std::cos(x);
  return (x / r) / d + r * std::sin(x) / (d * d);
}

template <typename S>
S g2_lifted(S x) {
  return csf::sqrt(S(1.0) + x * x) / (S(2.0) + csf::cos(x));
}

}  // namespace

TEST_SUITE("csfd") {

TEST_CASE("step size validation") {
  CHECK_NOTHROW(StepSize(1e-8));
  CHECK_NOTHROW(StepSize(1e-6));
  CHECK_NOTHROW(StepSize(1e-12));
  CHECK_THROWS_AS(StepSize(0.0), std::invalid_argument);
  CHECK_THROWS_AS(StepSize(-1e-8), std::invalid_argument);
  CHECK_THROWS_AS(StepSize(2e-6), std::invalid_argument);
  CHECK_THROWS_AS(StepSize(std::nan("")), std::invalid_argument);
  CHECK(StepSize().h == 1e-8);
}

TEST_CASE("complex product drops the second-order term") {
  const Complex a(1.0, 1e-8);
  const Complex b(2.0, 3e-8);
  const Complex p = a * b;
  CHECK(p.re == 2.0);
  CHECK(p.im == 5e-8);
}

TEST_CASE("complex division of a value by itself is exactly one") {
  const Complex z(3.7, 1e-8);
  const Complex q = z / z;
  CHECK(q.re == 1.0);
  CHECK(q.im == 0.0);
}

TEST_CASE("division by zero real part throws") {
  CHECK_THROWS_AS(Complex(1.0, 0.0) / Complex(0.0, 1e-8), std::domain_error);
  CHECK_THROWS_AS(Bicomplex(1.0) / Bicomplex(0.0, 1e-8, 0.0, 0.0),
                  std::domain_error);
}

TEST_CASE("elementary lifts match their closed forms") {
  const double h = 1e-8;
  SUBCASE("exp at zero") {
    const Complex r = csf::exp(Complex(0.0, h));
    CHECK(r.re == 1.0);
    CHECK(r.im == h);
  }
  SUBCASE("sqrt at four") {
    const Complex r = csf::sqrt(Complex(4.0, h));
    CHECK(r.re == 2.0);
    CHECK(r.im == h / 4.0);
  }
  SUBCASE("acos at one half") {
    const Complex r = csf::acos(Complex(0.5, h));
    CHECK(r.re == doctest::Approx(M_PI / 3.0).epsilon(1e-15));
    CHECK(r.im == doctest::Approx(-h / std::sqrt(0.75)).epsilon(1e-15));
  }
}

TEST_CASE("domain errors surface instead of NaNs") {
  CHECK_THROWS_AS(csf::log(Complex(-1.0, 1e-8)), std::domain_error);
  CHECK_THROWS_AS(csf::log(Complex(0.0, 1e-8)), std::domain_error);
  CHECK_THROWS_AS(csf::sqrt(Complex(-4.0, 1e-8)), std::domain_error);
  CHECK_THROWS_AS(csf::acos(Complex(1.5, 1e-8)), std::domain_error);
  CHECK_THROWS_AS(csf::acos(Bicomplex(-1.0001)), std::domain_error);
}

TEST_CASE("promotion rejects non-finite input") {
  const StepSize s;
  CHECK_THROWS_AS(csf::promote(std::nan(""), s), std::invalid_argument);
  CHECK_THROWS_AS(csf::promote(INFINITY, s), std::invalid_argument);
  const Complex z = csf::promote(2.5, s);
  CHECK(z.re == 2.5);
  CHECK(z.im == s.h);
}

TEST_CASE("first derivatives match analytic oracles to near machine precision") {
  auto gen = testutil::rng(17);
  const StepSize s;
  for (int k = 0; k < 100; ++k) {
    const double x = testutil::uniform(gen, -2.0, 2.0);
    const Complex z(x, s.h);
    const double d1 = csf::extract_derivative(g1_lifted(z), s);
    const double d2 = csf::extract_derivative(g2_lifted(z), s);
    CHECK(testutil::rel_err(d1, g1p(x)) < 1e-12);
    CHECK(testutil::rel_err(d2, g2p(x)) < 1e-12);
  }
}

TEST_CASE("derivative is flat across the step-size plateau") {
  // No subtraction means no cancellation: h spanning two decades moves the
  // derivative by O(h^2) only.
  for (double x : {-1.3, 0.2, 0.9, 1.7}) {
    const double d7 = csf::extract_derivative(g1_lifted(Complex(x, 1e-7)), StepSize(1e-7));
    const double d8 = csf::extract_derivative(g1_lifted(Complex(x, 1e-8)), StepSize(1e-8));
    const double d9 = csf::extract_derivative(g1_lifted(Complex(x, 1e-9)), StepSize(1e-9));
    CHECK(testutil::rel_err(d7, d8) < 1e-9);
    CHECK(testutil::rel_err(d9, d8) < 1e-9);
  }
}

TEST_CASE("single-precision forward differences collapse at the same step") {
  // The baseline failure mode this library exists to avoid: at h = 1e-8 a
  // float32 forward difference loses everything to rounding, while the
  // complex step stays exact.
  const float h = 1e-8f;
  double worst_fd = 0.0, worst_cs = 0.0;
  for (float x : {0.5f, 1.0f, 1.5f, 2.0f}) {
    const float fd = (std::exp(x + h) - std::exp(x)) / h;
    const double want = std::exp(static_cast<double>(x));
    worst_fd = std::max(worst_fd, testutil::rel_err(static_cast<double>(fd), want));
    const double cs = csf::extract_derivative(
        csf::exp(Complex(static_cast<double>(x), 1e-8)), StepSize(1e-8));
    worst_cs = std::max(worst_cs, testutil::rel_err(cs, want));
  }
  CHECK(worst_fd >= 1e-4);
  CHECK(worst_cs < 1e-12);
}

TEST_CASE("derivative extraction is linear, bit for bit") {
  auto gen = testutil::rng(23);
  for (int k = 0; k < 50; ++k) {
    const Complex z1(testutil::uniform(gen, -3, 3), testutil::uniform(gen, -1e-7, 1e-7));
    const Complex z2(testutil::uniform(gen, -3, 3), testutil::uniform(gen, -1e-7, 1e-7));
    const double c1 = testutil::uniform(gen, -2, 2);
    const double c2 = testutil::uniform(gen, -2, 2);
    const Complex lhs = Complex(c1) * z1 + Complex(c2) * z2;
    CHECK(lhs.im == c1 * z1.im + c2 * z2.im);
    CHECK(lhs.re == c1 * z1.re + c2 * z2.re);
  }
}

TEST_CASE("real channel is bit-identical to an all-double evaluation") {
  auto gen = testutil::rng(31);
  for (int k = 0; k < 200; ++k) {
    const double x = testutil::uniform(gen, -2.5, 2.5);
    const double plain = messy_pipeline<double>(x);
    const Complex seeded = messy_pipeline<Complex>(Complex(x, 1e-8));
    const Bicomplex seeded2 =
        messy_pipeline<Bicomplex>(Bicomplex(x, 1e-8, 1e-8, 0.0));
    CHECK(seeded.re == plain);
    CHECK(seeded2.re == plain);
  }
}

TEST_CASE("bicomplex im1 channel reproduces the complex im channel") {
  auto gen = testutil::rng(37);
  for (int k = 0; k < 100; ++k) {
    const double x = testutil::uniform(gen, -2.5, 2.5);
    const Complex c = messy_pipeline<Complex>(Complex(x, 1e-8));
    const Bicomplex b =
        messy_pipeline<Bicomplex>(Bicomplex(x, 1e-8, 0.0, 0.0));
    CHECK(b.im1 == c.im);
    CHECK(b.im2 == 0.0);
    CHECK(b.im12 == 0.0);
  }
}

TEST_CASE("quadratic form has the exact textbook hessian") {
  // f(x, y) = x^2 y at (1, 2): f_xx = 4, f_xy = 2, f_yy = 0.
  const StepSize s;
  auto f = [](Bicomplex x, Bicomplex y) { return x * x * y; };
  SUBCASE("xx") {
    const Bicomplex r = f(csf::promote2(1.0, s, true, true), Bicomplex(2.0));
    CHECK(csf::extract_hessian(r, s) == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("xy") {
    const Bicomplex r =
        f(csf::promote2(1.0, s, true, false), csf::promote2(2.0, s, false, true));
    CHECK(csf::extract_hessian(r, s) == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("yy") {
    const Bicomplex r = f(Bicomplex(1.0), csf::promote2(2.0, s, true, true));
    CHECK(csf::extract_hessian(r, s) == 0.0);
  }
}

TEST_CASE("second derivatives match analytic and finite-difference oracles") {
  auto gen = testutil::rng(41);
  const StepSize s;
  for (int k = 0; k < 60; ++k) {
    const double x = testutil::uniform(gen, -2.0, 2.0);
    const Bicomplex z(x, s.h, s.h, 0.0);
    const double got = csf::extract_hessian(g1_lifted(z), s);
    CHECK(testutil::rel_err(got, g1pp(x)) < 1e-10);
  }
  // Cross-check with a central difference of the complex-step first
  // derivative (an independent code path).
  auto d1_of = [&](double x) {
    return csf::extract_derivative(g2_lifted(Complex(x, s.h)), s);
  };
  for (double x : {-1.1, 0.3, 1.9}) {
    const double fd = testutil::fd1(d1_of, x, 1e-6);
    const double got = csf::extract_hessian(g2_lifted(Bicomplex(x, s.h, s.h, 0.0)), s);
    CHECK(testutil::rel_err(got, fd) < 1e-7);
  }
}

TEST_CASE("hessian seeding is symmetric in the two channels") {
  auto gen = testutil::rng(43);
  const StepSize s;
  auto f = [](Bicomplex x, Bicomplex y) {
    return csf::exp(x * y) / (Bicomplex(2.0) + csf::sin(x)) + csf::sqrt(y * y + Bicomplex(1.0));
  };
  for (int k = 0; k < 50; ++k) {
    const double x = testutil::uniform(gen, -1.5, 1.5);
    const double y = testutil::uniform(gen, -1.5, 1.5);
    const double hxy = csf::extract_hessian(
        f(csf::promote2(x, s, true, false), csf::promote2(y, s, false, true)), s);
    const double hyx = csf::extract_hessian(
        f(csf::promote2(x, s, false, true), csf::promote2(y, s, true, false)), s);
    CHECK(testutil::rel_err(hxy, hyx) < 1e-13);
  }
}

TEST_CASE("selection operators keep the first argument on ties") {
  const Complex a(2.0, 5e-8), b(2.0, 9e-8);
  CHECK(csf::min(a, b).im == 5e-8);
  CHECK(csf::max(a, b).im == 5e-8);
  const Complex lo(1.0, 1e-8), hi(4.0, 2e-8);
  CHECK(csf::min(lo, hi).im == 1e-8);
  CHECK(csf::max(lo, hi).im == 2e-8);
}

TEST_CASE("abs flips channels below zero, passes through at zero") {
  const Complex n(-3.0, 7e-8);
  CHECK(csf::abs(n).re == 3.0);
  CHECK(csf::abs(n).im == -7e-8);
  const Complex z(0.0, 7e-8);
  CHECK(csf::abs(z).im == 7e-8);
  const Bicomplex bn(-1.0, 2e-8, 3e-8, 4e-16);
  CHECK(csf::abs(bn).im12 == -4e-16);
}

TEST_CASE("clamp saturation zeroes derivative channels") {
  const Complex inside(0.5, 3e-8);
  CHECK(csf::clamp(inside, -1.0, 1.0).im == 3e-8);
  const Complex above(1.5, 3e-8);
  CHECK(csf::clamp(above, -1.0, 1.0).re == 1.0);
  CHECK(csf::clamp(above, -1.0, 1.0).im == 0.0);
  const Complex below(-1.5, 3e-8);
  CHECK(csf::clamp(below, -1.0, 1.0).re == -1.0);
  CHECK(csf::clamp(below, -1.0, 1.0).im == 0.0);
  // Boundary value is passed through, keeping its channel.
  const Complex edge(1.0, 3e-8);
  CHECK(csf::clamp(edge, -1.0, 1.0).im == 3e-8);
}

TEST_CASE("product real part is exactly the product of real parts") {
  auto gen = testutil::rng(47);
  for (int k = 0; k < 100; ++k) {
    const Complex a(testutil::uniform(gen, -5, 5), testutil::uniform(gen, -1, 1));
    const Complex b(testutil::uniform(gen, -5, 5), testutil::uniform(gen, -1, 1));
    CHECK((a * b).re == a.re * b.re);
    const Bicomplex ba(a.re, a.im, 0.5 * a.im, a.im * a.im);
    const Bicomplex bb(b.re, b.im, 2.0 * b.im, b.im * b.im);
    CHECK((ba * bb).re == ba.re * bb.re);
  }
}

TEST_CASE("bicomplex division is the exact inverse of multiplication") {
  auto gen = testutil::rng(53);
  for (int k = 0; k < 100; ++k) {
    const Bicomplex a(testutil::uniform(gen, -4, 4), testutil::uniform(gen, -1e-6, 1e-6),
                      testutil::uniform(gen, -1e-6, 1e-6), testutil::uniform(gen, -1e-12, 1e-12));
    Bicomplex b(testutil::uniform(gen, 0.5, 4), testutil::uniform(gen, -1e-6, 1e-6),
                testutil::uniform(gen, -1e-6, 1e-6), testutil::uniform(gen, -1e-12, 1e-12));
    const Bicomplex r = (a / b) * b;
    CHECK(testutil::rel_err(r.re, a.re) < 1e-14);
    CHECK(std::fabs(r.im1 - a.im1) < 1e-18 + 1e-12 * std::fabs(a.im1));
    CHECK(std::fabs(r.im2 - a.im2) < 1e-18 + 1e-12 * std::fabs(a.im2));
    CHECK(std::fabs(r.im12 - a.im12) < 1e-22 + 1e-10 * std::fabs(a.im12));
  }
}

TEST_CASE("gradient and hessian drivers agree with analytic results") {
  // f(xi) = xi0^2 xi1 + exp(xi2) + sin(xi3) xi4 + xi5^2 / 2.
  auto f = [](const auto& xi) {
    using S = std::decay_t<decltype(xi[0])>;
    return xi[0] * xi[0] * xi[1] + csf::exp(xi[2]) + csf::sin(xi[3]) * xi[4] +
           xi[5] * xi[5] * S(0.5);
  };
  csf::Vec6d x;
  x << 1.0, 2.0, 0.3, -0.7, 1.4, 2.2;
  const csf::Vec6d g = csf::csfd_gradient(f, x);
  CHECK(g[0] == doctest::Approx(2.0 * x[0] * x[1]).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(x[0] * x[0]).epsilon(1e-12));
  CHECK(g[2] == doctest::Approx(std::exp(x[2])).epsilon(1e-12));
  CHECK(g[3] == doctest::Approx(std::cos(x[3]) * x[4]).epsilon(1e-12));
  CHECK(g[4] == doctest::Approx(std::sin(x[3])).epsilon(1e-12));
  CHECK(g[5] == doctest::Approx(x[5]).epsilon(1e-12));

  const csf::Mat6d h = csf::csfd_hessian(f, x);
  CHECK(h(0, 0) == doctest::Approx(2.0 * x[1]).epsilon(1e-12));
  CHECK(h(0, 1) == doctest::Approx(2.0 * x[0]).epsilon(1e-12));
  CHECK(h(1, 0) == h(0, 1));
  CHECK(h(2, 2) == doctest::Approx(std::exp(x[2])).epsilon(1e-12));
  CHECK(h(3, 4) == doctest::Approx(std::cos(x[3])).epsilon(1e-12));
  CHECK(h(3, 3) == doctest::Approx(-std::sin(x[3]) * x[4]).epsilon(1e-12));
  CHECK(h(5, 5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(h(0, 2) == 0.0);
  CHECK((h - h.transpose()).norm() == 0.0);
}

TEST_CASE("pairwise summation is deterministic and accurate") {
  auto gen = testutil::rng(59);
  std::vector<double> terms(10001);
  for (auto& t : terms) t = testutil::uniform(gen, -1.0, 1.0);
  const double s1 = csf::pairwise_sum(terms);
  const double s2 = csf::pairwise_sum(terms);
  CHECK(s1 == s2);
  long double ref = 0.0L;
  for (double t : terms) ref += static_cast<long double>(t);
  CHECK(testutil::rel_err(s1, static_cast<double>(ref)) < 1e-12);
  CHECK(csf::pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(csf::pairwise_sum(std::vector<double>{4.25}) == 4.25);
}

TEST_CASE("eigen vectors of lifted scalars propagate derivatives") {
  const StepSize s;
  csf::Vec3<Complex> v;
  v << Complex(3.0, s.h), Complex(4.0, 0.0), Complex(0.0, 0.0);
  const Complex n = v.norm();
  CHECK(n.re == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(csf::extract_derivative(n, s) == doctest::Approx(3.0 / 5.0).epsilon(1e-12));

  const Complex d = v.dot(v);
  CHECK(d.re == doctest::Approx(25.0).epsilon(1e-15));
  CHECK(csf::extract_derivative(d, s) == doctest::Approx(6.0).epsilon(1e-12));

  // Mixed scalar-kind products through Eigen expressions.
  csf::Vec3<Complex> w = 2.0 * v;
  CHECK(w.x().re == 6.0);
  CHECK(w.x().im == 2.0 * s.h);

  csf::Mat3<Complex> m = csf::Mat3<Complex>::Identity();
  m(0, 1) = Complex(1.0, 0.0);
  csf::Vec3<Complex> mv = m * v;
  CHECK(mv.x().re == 7.0);
  CHECK(mv.x().im == s.h);
}

}  // TEST_SUITE
