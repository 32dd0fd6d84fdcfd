#pragma once

// Rigid-body motion primitives on SE(3) and se(3).
//
// Screw coordinates are ordered (linear, angular) throughout: a twist is
// (v, w) and its dual wrench is (f, m), so the pairing <F, V> = f.v + m.w is a
// plain dot product of the stacked 6-vectors. With this ordering the adjoint
// of g = (R, p) is
//
//     Ad_g = [ R   [p]R ]        ad_(v,w) = [ [w]  [v] ]
//            [ 0    R   ]                   [  0   [w] ]
//
// where [x] is the 3x3 cross-product matrix.

#include <Eigen/Dense>

#include <cmath>

namespace scandyn {

using Vector3d = Eigen::Vector3d;
using Matrix3d = Eigen::Matrix3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

inline Matrix3d skew(const Vector3d& x) {
  Matrix3d s;
  s << 0.0, -x.z(), x.y(),
       x.z(), 0.0, -x.x(),
       -x.y(), x.x(), 0.0;
  return s;
}

/// Element of se(3): velocity, acceleration or joint axis.
struct Twist {
  Vector6d coeffs = Vector6d::Zero();

  Twist() = default;
  explicit Twist(const Vector6d& c) : coeffs(c) {}
  Twist(const Vector3d& linear, const Vector3d& angular) {
    coeffs << linear, angular;
  }

  static Twist Zero() { return Twist{}; }

  Vector3d linear() const { return coeffs.head<3>(); }
  Vector3d angular() const { return coeffs.tail<3>(); }

  Twist operator+(const Twist& o) const { return Twist(coeffs + o.coeffs); }
  Twist operator-(const Twist& o) const { return Twist(coeffs - o.coeffs); }
  Twist operator-() const { return Twist(-coeffs); }
  Twist operator*(double s) const { return Twist(coeffs * s); }
  Twist& operator+=(const Twist& o) {
    coeffs += o.coeffs;
    return *this;
  }
  bool operator==(const Twist& o) const { return coeffs == o.coeffs; }
};

inline Twist operator*(double s, const Twist& t) { return t * s; }

/// Element of se(3)*: force/moment pair acting on a body.
struct Wrench {
  Vector6d coeffs = Vector6d::Zero();

  Wrench() = default;
  explicit Wrench(const Vector6d& c) : coeffs(c) {}
  Wrench(const Vector3d& force, const Vector3d& moment) {
    coeffs << force, moment;
  }

  static Wrench Zero() { return Wrench{}; }

  Vector3d force() const { return coeffs.head<3>(); }
  Vector3d moment() const { return coeffs.tail<3>(); }

  Wrench operator+(const Wrench& o) const { return Wrench(coeffs + o.coeffs); }
  Wrench operator-(const Wrench& o) const { return Wrench(coeffs - o.coeffs); }
  Wrench operator-() const { return Wrench(-coeffs); }
  Wrench operator*(double s) const { return Wrench(coeffs * s); }
  Wrench& operator+=(const Wrench& o) {
    coeffs += o.coeffs;
    return *this;
  }
  bool operator==(const Wrench& o) const { return coeffs == o.coeffs; }
};

/// Power pairing; for a joint axis S this is the joint torque S^T F.
inline double pairing(const Wrench& f, const Twist& v) {
  return f.coeffs.dot(v.coeffs);
}

/// Element of SE(3), acting on points as x -> R x + p.
struct RigidTransform {
  Matrix3d rotation = Matrix3d::Identity();
  Vector3d translation = Vector3d::Zero();

  static RigidTransform Identity() { return RigidTransform{}; }

  RigidTransform operator*(const RigidTransform& o) const {
    return {rotation * o.rotation, rotation * o.translation + translation};
  }

  RigidTransform inverse() const {
    Matrix3d rt = rotation.transpose();
    return {rt, -rt * translation};
  }

  Vector3d apply(const Vector3d& x) const { return rotation * x + translation; }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  bool operator==(const RigidTransform& o) const {
    return rotation == o.rotation && translation == o.translation;
  }
};

/// Frobenius distance of the rotation block from SO(3) membership.
inline double orthonormality_error(const Matrix3d& r) {
  double err = (r.transpose() * r - Matrix3d::Identity()).norm();
  return err + std::abs(r.determinant() - 1.0);
}

/// exp(xi * theta). Handles revolute (unit angular part), prismatic (zero
/// angular part) and general twists; small rotation angles use series
/// expansions of the closed-form coefficients.
inline RigidTransform exp_twist(const Twist& xi, double theta) {
  const Vector3d w = xi.angular() * theta;
  const Vector3d v = xi.linear() * theta;
  const double phi = w.norm();

  // R = I + a [w] + b [w]^2,  p = (I + b [w] + c [w]^2) v
  double a, b, c;
  if (phi < 1e-6) {
    const double phi2 = phi * phi;
    a = 1.0 - phi2 / 6.0;
    b = 0.5 - phi2 / 24.0;
    c = 1.0 / 6.0 - phi2 / 120.0;
  } else {
    const double phi2 = phi * phi;
    a = std::sin(phi) / phi;
    b = (1.0 - std::cos(phi)) / phi2;
    c = (phi - std::sin(phi)) / (phi2 * phi);
  }

  const Matrix3d W = skew(w);
  const Matrix3d W2 = W * W;
  RigidTransform g;
  g.rotation = Matrix3d::Identity() + a * W + b * W2;
  g.translation = (Matrix3d::Identity() + b * W + c * W2) * v;
  return g;
}

inline Matrix6d adjoint(const RigidTransform& g) {
  Matrix6d ad = Matrix6d::Zero();
  ad.topLeftCorner<3, 3>() = g.rotation;
  ad.topRightCorner<3, 3>() = skew(g.translation) * g.rotation;
  ad.bottomRightCorner<3, 3>() = g.rotation;
  return ad;
}

/// Ad_g(xi) without forming the 6x6 matrix.
inline Twist adjoint_apply(const RigidTransform& g, const Twist& xi) {
  const Vector3d rw = g.rotation * xi.angular();
  return {g.rotation * xi.linear() + g.translation.cross(rw), rw};
}

/// Lie bracket matrix: ad_small(xi) * eta = [xi, eta].
inline Matrix6d ad_small(const Twist& xi) {
  Matrix6d m = Matrix6d::Zero();
  const Matrix3d w = skew(xi.angular());
  m.topLeftCorner<3, 3>() = w;
  m.topRightCorner<3, 3>() = skew(xi.linear());
  m.bottomRightCorner<3, 3>() = w;
  return m;
}

inline Twist lie_bracket(const Twist& xi, const Twist& eta) {
  const Vector3d v = xi.linear(), w = xi.angular();
  return {w.cross(eta.linear()) + v.cross(eta.angular()),
          w.cross(eta.angular())};
}

/// Ad_g^T F.
inline Wrench coadjoint_apply(const RigidTransform& g, const Wrench& f) {
  const Matrix3d rt = g.rotation.transpose();
  return {rt * f.force(), rt * (f.moment() - g.translation.cross(f.force()))};
}

/// ad_xi^T F.
inline Wrench ad_small_transpose_apply(const Twist& xi, const Wrench& f) {
  const Vector3d v = xi.linear(), w = xi.angular();
  return {-w.cross(f.force()), -v.cross(f.force()) - w.cross(f.moment())};
}

/// Body inertia expressed at the link frame origin.
///
/// Built from mass m, centre of mass c and rotational inertia I_c about the
/// centre of mass:
///
///     J = [ m I       -m [c]          ]
///         [ m [c]   I_c - m [c][c]    ]
class SpatialInertia {
 public:
  SpatialInertia() = default;
  SpatialInertia(double mass, const Vector3d& com, const Matrix3d& rot_inertia)
      : mass_(mass), com_(com), rot_inertia_(rot_inertia) {
    const Matrix3d c = skew(com);
    matrix_.topLeftCorner<3, 3>() = mass * Matrix3d::Identity();
    matrix_.topRightCorner<3, 3>() = -mass * c;
    matrix_.bottomLeftCorner<3, 3>() = mass * c;
    matrix_.bottomRightCorner<3, 3>() = rot_inertia - mass * c * c;
  }

  double mass() const { return mass_; }
  const Vector3d& com() const { return com_; }
  /// Rotational inertia about the centre of mass.
  const Matrix3d& rot_inertia() const { return rot_inertia_; }
  const Matrix6d& matrix() const { return matrix_; }

  Wrench apply(const Twist& v) const { return Wrench(matrix_ * v.coeffs); }

  bool operator==(const SpatialInertia& o) const {
    return mass_ == o.mass_ && com_ == o.com_ && rot_inertia_ == o.rot_inertia_;
  }

 private:
  double mass_ = 0.0;
  Vector3d com_ = Vector3d::Zero();
  Matrix3d rot_inertia_ = Matrix3d::Zero();
  Matrix6d matrix_ = Matrix6d::Zero();
};

}  // namespace scandyn
