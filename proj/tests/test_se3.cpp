#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "csf/diff.hpp"
#include "csf/se3.hpp"
#include "doctest.h"
#include "oracles.hpp"

using csf::Complex;
using csf::Mat3d;
using csf::Mat4d;
using csf::Pose;
using csf::StepSize;
using csf::Vec3d;
using csf::Vec6d;

namespace {

// Independent oracle: the literal 4x4 matrix exponential of the twist.
Mat4d matrix_exp_oracle(const Vec6d& xi) {
  Mat4d m = Mat4d::Zero();
  m.topLeftCorner<3, 3>() = csf::skew<double>(xi.tail<3>());
  m.topRightCorner<3, 1>() = xi.head<3>();
  return m.exp();
}

Vec6d random_twist(std::mt19937_64& gen, double tmax, double rmax) {
  Vec6d xi;
  for (int i = 0; i < 3; ++i) xi[i] = testutil::uniform(gen, -tmax, tmax);
  for (int i = 3; i < 6; ++i) xi[i] = testutil::uniform(gen, -rmax, rmax);
  return xi;
}

}  // namespace

TEST_SUITE("se3") {

TEST_CASE("exp of zero is exactly the identity") {
  const Pose p = csf::exp_map<double>(Vec6d::Zero());
  CHECK((p.rotation - Mat3d::Identity()).norm() == 0.0);
  CHECK(p.translation.norm() == 0.0);
}

TEST_CASE("pure translation passes through untouched") {
  Vec6d xi = Vec6d::Zero();
  xi << 1.0, -2.0, 3.0, 0.0, 0.0, 0.0;
  const Pose p = csf::exp_map<double>(xi);
  CHECK((p.rotation - Mat3d::Identity()).norm() == 0.0);
  CHECK(p.translation.x() == 1.0);
  CHECK(p.translation.y() == -2.0);
  CHECK(p.translation.z() == 3.0);
}

TEST_CASE("quarter turn about z") {
  Vec6d xi = Vec6d::Zero();
  xi[5] = M_PI / 2.0;
  const Pose p = csf::exp_map<double>(xi);
  Mat3d want;
  want << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((p.rotation - want).norm() < 1e-15);
}

TEST_CASE("exp matches the dense matrix exponential") {
  auto gen = testutil::rng(61);
  for (int k = 0; k < 50; ++k) {
    const Vec6d xi = random_twist(gen, 2.0, 2.5);
    const Pose p = csf::exp_map<double>(xi);
    const Mat4d want = matrix_exp_oracle(xi);
    CHECK((p.matrix() - want).norm() < 1e-12);
  }
}

TEST_CASE("rotation agrees with angle-axis") {
  auto gen = testutil::rng(67);
  for (int k = 0; k < 50; ++k) {
    Vec3d phi;
    phi << testutil::uniform(gen, -2, 2), testutil::uniform(gen, -2, 2),
        testutil::uniform(gen, -2, 2);
    Vec6d xi = Vec6d::Zero();
    xi.tail<3>() = phi;
    const Mat3d want =
        Eigen::AngleAxisd(phi.norm(), phi.normalized()).toRotationMatrix();
    CHECK((csf::exp_map<double>(xi).rotation - want).norm() < 1e-13);
  }
}

TEST_CASE("series branch joins the closed form continuously") {
  Vec3d dir;
  dir << 0.6, -0.48, 0.64;  // unit
  Vec6d lo = Vec6d::Zero(), hi = Vec6d::Zero();
  lo.tail<3>() = 0.99e-7 * dir;
  hi.tail<3>() = 1.01e-7 * dir;
  lo.head<3>() << 0.2, 0.3, -0.1;
  hi.head<3>() = lo.head<3>();
  const Pose pl = csf::exp_map<double>(lo);
  const Pose ph = csf::exp_map<double>(hi);
  CHECK((pl.matrix() - ph.matrix()).norm() < 1e-7);
  // And both sides agree with the dense exponential.
  CHECK((pl.matrix() - matrix_exp_oracle(lo)).norm() < 1e-14);
  CHECK((ph.matrix() - matrix_exp_oracle(hi)).norm() < 1e-14);
}

TEST_CASE("compose and inverse are consistent") {
  auto gen = testutil::rng(71);
  for (int k = 0; k < 20; ++k) {
    const Pose a = csf::exp_map<double>(random_twist(gen, 1.0, 2.0));
    const Pose b = csf::exp_map<double>(random_twist(gen, 1.0, 2.0));
    const Pose id = a * a.inverse();
    CHECK((id.rotation - Mat3d::Identity()).norm() < 1e-14);
    CHECK(id.translation.norm() < 1e-14);
    // (ab)^-1 = b^-1 a^-1
    const Pose lhs = (a * b).inverse();
    const Pose rhs = b.inverse() * a.inverse();
    CHECK((lhs.matrix() - rhs.matrix()).norm() < 1e-13);
    // Transform matches matrix action.
    Vec3d p;
    p << testutil::uniform(gen, -2, 2), testutil::uniform(gen, -2, 2),
        testutil::uniform(gen, -2, 2);
    const Vec3d q = a * p;
    const Vec3d qm = (a.matrix() * p.homogeneous()).head<3>();
    CHECK((q - qm).norm() < 1e-14);
  }
}

TEST_CASE("rotation angle round-trips through exp") {
  auto gen = testutil::rng(73);
  for (int k = 0; k < 40; ++k) {
    const double theta = testutil::uniform(gen, 1e-3, M_PI - 1e-3);
    Vec3d axis;
    axis << testutil::uniform(gen, -1, 1), testutil::uniform(gen, -1, 1),
        testutil::uniform(gen, -1, 1);
    axis.normalize();
    Vec6d xi = Vec6d::Zero();
    xi.tail<3>() = theta * axis;
    CHECK(csf::log_angle(csf::exp_map<double>(xi)) ==
          doctest::Approx(theta).epsilon(1e-10));
  }
  CHECK(csf::log_angle(Pose::identity()) == 0.0);
}

TEST_CASE("point jacobian at the identity is [I | -skew(p)]") {
  Vec3d p;
  p << 0.4, -1.2, 2.0;
  const StepSize s;
  for (int row = 0; row < 3; ++row) {
    auto f = [&](const auto& xi) {
      using S = std::decay_t<decltype(xi[0])>;
      csf::Vec3<S> ps;
      for (int i = 0; i < 3; ++i) ps[i] = S(p[i]);
      return (csf::exp_map(xi) * ps)[row];
    };
    const Vec6d g = csf::csfd_gradient(f, Vec6d::Zero(), s);
    Eigen::Matrix<double, 3, 6> want;
    want << Mat3d::Identity(), -csf::skew<double>(p);
    for (int i = 0; i < 6; ++i)
      CHECK(g[i] == doctest::Approx(want(row, i)).epsilon(1e-10));
  }
}

TEST_CASE("twist derivatives match finite differences away from zero") {
  auto gen = testutil::rng(79);
  const StepSize s;
  Vec3d p;
  p << 1.0, 0.5, -0.7;
  for (int k = 0; k < 10; ++k) {
    const Vec6d xi0 = random_twist(gen, 0.8, 1.2);
    auto f = [&](const auto& xi) {
      using S = std::decay_t<decltype(xi[0])>;
      csf::Vec3<S> ps;
      for (int i = 0; i < 3; ++i) ps[i] = S(p[i]);
      const auto q = csf::exp_map(xi) * ps;
      return q[0] + S(2.0) * q[1] - q[2];
    };
    const Vec6d g = csf::csfd_gradient(f, xi0, s);
    for (int i = 0; i < 6; ++i) {
      auto fi = [&](double v) {
        Vec6d x = xi0;
        x[i] = v;
        return f(x);
      };
      CHECK(g[i] == doctest::Approx(testutil::fd1(fi, xi0[i], 1e-6)).epsilon(1e-6));
    }
  }
}

TEST_CASE("lifted exp real channel matches the double path bit for bit") {
  auto gen = testutil::rng(83);
  for (int k = 0; k < 20; ++k) {
    const Vec6d xi = random_twist(gen, 1.0, 2.0);
    const Pose pd = csf::exp_map<double>(xi);
    csf::Vec6<Complex> xc;
    for (int i = 0; i < 6; ++i) xc[i] = Complex(xi[i], i == (k % 6) ? 1e-8 : 0.0);
    const csf::PoseT<Complex> pc = csf::exp_map(xc);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) CHECK(pc.rotation(r, c).re == pd.rotation(r, c));
      CHECK(pc.translation[r].re == pd.translation[r]);
    }
  }
}

TEST_CASE("second derivatives through exp match differenced gradients") {
  const StepSize s;
  Vec3d p;
  p << 0.3, -0.9, 1.4;
  Vec3d n;
  n << 0.48, 0.6, 0.64;
  auto f = [&](const auto& xi) {
    using S = std::decay_t<decltype(xi[0])>;
    csf::Vec3<S> ps, ns;
    for (int i = 0; i < 3; ++i) {
      ps[i] = S(p[i]);
      ns[i] = S(n[i]);
    }
    const auto e = (csf::exp_map(xi) * ps).dot(ns);
    return e * e;
  };
  Vec6d xi0;
  xi0 << 0.1, -0.2, 0.15, 0.3, -0.25, 0.2;
  const csf::Mat6d h = csf::csfd_hessian(f, xi0, s);
  CHECK((h - h.transpose()).norm() == 0.0);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      auto gj = [&](double v) {
        Vec6d x = xi0;
        x[i] = v;
        return csf::csfd_gradient(f, x, s)[j];
      };
      const double fd = testutil::fd1(gj, xi0[i], 1e-6);
      CHECK(std::fabs(h(i, j) - fd) < 1e-4 * std::max(1.0, std::fabs(fd)));
    }
  }
}

}  // TEST_SUITE
