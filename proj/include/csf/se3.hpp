#pragma once

// Rigid-body poses and the twist exponential, templated over the scalar so
// derivative channels flow through rotation and translation alike. Twists
// are ordered (rho, phi): translation in [0..2], rotation in [3..5].

#include "csf/csfd.hpp"

namespace csf {

template <typename S>
Mat3<S> skew(const Vec3<S>& v) {
  Mat3<S> m;
  m << S(0.0), -v.z(), v.y(),
       v.z(), S(0.0), -v.x(),
       -v.y(), v.x(), S(0.0);
  return m;
}

template <typename S>
struct PoseT {
  Mat3<S> rotation = Mat3<S>::Identity();
  Vec3<S> translation = Vec3<S>::Zero();

  static PoseT identity() { return {}; }

  Vec3<S> operator*(const Vec3<S>& p) const { return rotation * p + translation; }

  PoseT operator*(const PoseT& o) const {
    return {rotation * o.rotation, rotation * o.translation + translation};
  }

  // Rigid inverse; plain transpose, no conjugation.
  PoseT inverse() const {
    Mat3<S> rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  Mat4<S> matrix() const {
    Mat4<S> m = Mat4<S>::Identity();
    m.template topLeftCorner<3, 3>() = rotation;
    m.template topRightCorner<3, 1>() = translation;
    return m;
  }
};

using Pose = PoseT<double>;

template <typename S>
PoseT<S> pose_cast(const Pose& p) {
  PoseT<S> out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out.rotation(r, c) = S(p.rotation(r, c));
    out.translation[r] = S(p.translation[r]);
  }
  return out;
}

// Real channel of a derivative-carrying pose, for discrete decisions that
// must not depend on the perturbation.
template <typename S>
Pose real_pose(const PoseT<S>& p) {
  Pose out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c)
      out.rotation(r, c) = real_part(p.rotation(r, c));
    out.translation[r] = real_part(p.translation[r]);
  }
  return out;
}

// exp of a twist. Both rotation and the translation mixing matrix share the
// series  R = I + A [phi] + B [phi]^2,  V = I + B [phi] + C [phi]^2  with
//   A = sin(t)/t, B = (1-cos(t))/t^2, C = (t-sin(t))/t^3,  t = |phi|.
// Below t = 1e-7 the coefficients switch to their Taylor forms in t^2, which
// also avoids sqrt at zero where the derivative channel would blow up.
template <typename S>
PoseT<S> exp_map(const Vec6<S>& xi) {
  const Vec3<S> rho = xi.template head<3>();
  const Vec3<S> phi = xi.template tail<3>();
  const S t2 = phi.dot(phi);

  S a, b, c;
  if (real_part(t2) < 1e-14) {
    a = S(1.0) - t2 / S(6.0);
    b = S(0.5) - t2 / S(24.0);
    c = S(1.0 / 6.0) - t2 / S(120.0);
  } else {
    const S t = sqrt(t2);
    a = sin(t) / t;
    // 1 - cos(t) written as 2 sin^2(t/2): no cancellation for small t, so
    // the closed form stays accurate right down to the series threshold.
    const S sh = sin(t / S(2.0));
    b = S(2.0) * sh * sh / t2;
    c = (t - sin(t)) / (t2 * t);
  }

  const Mat3<S> px = skew(phi);
  const Mat3<S> px2 = px * px;
  PoseT<S> out;
  out.rotation = Mat3<S>::Identity() + a * px + b * px2;
  const Mat3<S> v = Mat3<S>::Identity() + b * px + c * px2;
  out.translation = v * rho;
  return out;
}

// Rotation angle recovered from the trace; the argument is clamped into
// acos's domain so accumulated roundoff cannot throw.
template <typename S>
S log_angle(const PoseT<S>& p) {
  const S arg = (p.rotation.trace() - S(1.0)) / S(2.0);
  return acos(clamp(arg, -1.0, 1.0));
}

// Left-multiplied update: the increment acts in the fixed frame.
template <typename S>
PoseT<S> apply_increment(const Vec6<S>& delta, const PoseT<S>& pose) {
  return exp_map(delta) * pose;
}

}  // namespace csf
