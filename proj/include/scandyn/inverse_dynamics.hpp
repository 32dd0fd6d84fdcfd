#pragma once

// Inverse dynamics of a serial chain: the sequential Newton-Euler recursion
// and its reformulation as forward/backward prefix scans over the semigroup
// SE(3) x se(3)^2 and over affine wrench maps.
//
// Frames: link i's frame is f_{i-1,i} = M_i exp(S_i q_i) relative to link
// i-1. V_i, Vdot_i are body twists of link i and F_i is the wrench joint i
// exerts on link i, all expressed in frame i. The tip wrench F_{n+1} is
// given in frame n.

#include "scandyn/robot_model.hpp"
#include "scandyn/scan.hpp"
#include "scandyn/se3.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace scandyn {

struct DynamicsResult {
  std::vector<Twist> V;
  std::vector<Twist> Vdot;
  std::vector<Wrench> F;
  VectorXd tau;
  VectorXd qdd;
};

/// Relative sup-norm error ||a - b||_inf / max(1, ||b||_inf).
inline double relative_error(const VectorXd& a, const VectorXd& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

namespace detail {

// Parallel maps fan out only when every worker gets a few links.
inline std::size_t map_workers(const ScanPlan& plan, std::size_t n) {
  if (plan.strategy == ScanStrategy::sequential) return 1;
  return n >= 32 * plan.worker_count ? plan.worker_count : 1;
}

template <typename Body>
void parallel_map(const ScanPlan& plan, std::size_t n, Body&& body) {
  parallel_for(n, map_workers(plan, n), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) body(i);
  });
}

}  // namespace detail

/// f_{i-1,i} = M_i exp(S_i q_i) for every joint.
inline std::vector<RigidTransform> link_transforms(const ChainModel& model,
                                                   const VectorXd& q,
                                                   const ScanPlan& plan = {}) {
  std::vector<RigidTransform> f(model.size());
  detail::parallel_map(plan, model.size(), [&](std::size_t i) {
    const LinkSpec& l = model.links[i];
    f[i] = l.home * exp_twist(l.joint_twist, q[static_cast<Eigen::Index>(i)]);
  });
  return f;
}

// ---------------------------------------------------------------------------
// Bias force and its quadratic-term decomposition

/// Fhat = J Vdot - ad_V^T (J V).
inline Wrench bias_force(const SpatialInertia& J, const Twist& V,
                         const Twist& Vdot) {
  return J.apply(Vdot) - ad_small_transpose_apply(V, J.apply(V));
}

/// Q(V) = (w x v, w1^2, w1 w2, w1 w3, w2^2, w2 w3, w3^2) for V = (v, w).
using BiasQuadratics = Eigen::Matrix<double, 9, 1>;

inline BiasQuadratics bias_quadratics(const Twist& V) {
  const Vector3d v = V.linear(), w = V.angular();
  BiasQuadratics q;
  q << w.cross(v), w.x() * w.x(), w.x() * w.y(), w.x() * w.z(), w.y() * w.y(),
      w.y() * w.z(), w.z() * w.z();
  return q;
}

/// Order of the upper-triangle products (a, b), a <= b, inside Q.
inline constexpr std::array<std::pair<int, int>, 6> kSymPairs{
    {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};

/// Coefficients of a quadratic form q(w) = B(w, w) on the six products
/// w_a w_b (a <= b), recovered by polarization.
template <int Rows, typename Quadratic>
Eigen::Matrix<double, Rows, 6> quadratic_coefficients(const Quadratic& q) {
  Eigen::Matrix<double, Rows, 6> out;
  for (int k = 0; k < 6; ++k) {
    const auto [a, b] = kSymPairs[static_cast<std::size_t>(k)];
    const Vector3d ea = Vector3d::Unit(a), eb = Vector3d::Unit(b);
    if (a == b) {
      out.col(k) = q(ea);
    } else {
      out.col(k) = q(ea + eb) - q(ea) - q(eb);
    }
  }
  return out;
}

/// The 6x9 map with -ad_V^T (J V) = L(J) Q(V). Only these nine quadratic
/// monomials of V appear in the gyroscopic term.
inline Eigen::Matrix<double, 6, 9> bias_quadratic_map(const SpatialInertia& J) {
  const double m = J.mass();
  const Vector3d c = J.com();
  const Matrix3d rot_origin = J.matrix().bottomRightCorner<3, 3>();
  Eigen::Matrix<double, 6, 9> L = Eigen::Matrix<double, 6, 9>::Zero();
  // w x v enters as m (w x v) and m c x (w x v).
  L.block<3, 3>(0, 0) = m * Matrix3d::Identity();
  L.block<3, 3>(3, 0) = m * skew(c);
  // Pure angular terms: m (w (w.c) - c |w|^2) and w x (I_o w).
  L.block<3, 6>(0, 3) = quadratic_coefficients<3>([&](const Vector3d& w) -> Vector3d {
    return m * (w * w.dot(c) - c * w.squaredNorm());
  });
  L.block<3, 6>(3, 3) = quadratic_coefficients<3>([&](const Vector3d& w) -> Vector3d {
    return w.cross(rot_origin * w);
  });
  return L;
}

/// Fhat evaluated as J Vdot + L(J) Q(V).
inline Wrench bias_force_quadratic(const SpatialInertia& J, const Twist& V,
                                   const Twist& Vdot) {
  return Wrench(J.matrix() * Vdot.coeffs +
                bias_quadratic_map(J) * bias_quadratics(V));
}

// ---------------------------------------------------------------------------
// Sequential recursion

/// Newton-Euler forward/backward recursion, O(n).
inline DynamicsResult id_recursive(const ChainModel& model,
                                   const DynamicsInput& in) {
  check_input_sizes(model, in, false);
  const std::size_t n = model.size();
  DynamicsResult r;
  r.V.resize(n);
  r.Vdot.resize(n);
  r.F.resize(n);
  r.tau.resize(static_cast<Eigen::Index>(n));
  r.qdd = in.qdd;

  std::vector<RigidTransform> f_inv(n);
  Twist V = in.base_velocity, Vdot = in.base_acceleration;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const LinkSpec& l = model.links[i];
    f_inv[i] = (l.home * exp_twist(l.joint_twist, in.q[k])).inverse();
    const Twist sqd = l.joint_twist * in.qd[k];
    const Twist adV = adjoint_apply(f_inv[i], V);
    V = adV + sqd;
    Vdot = l.joint_twist * in.qdd[k] + adjoint_apply(f_inv[i], Vdot) -
           lie_bracket(sqd, adV);
    r.V[i] = V;
    r.Vdot[i] = Vdot;
  }

  Wrench F = in.tip_force;
  for (std::size_t i = n; i-- > 0;) {
    const LinkSpec& l = model.links[i];
    const Wrench carried =
        i + 1 < n ? coadjoint_apply(f_inv[i + 1], F) : F;
    F = carried + bias_force(l.inertia, r.V[i], r.Vdot[i]);
    r.F[i] = F;
    r.tau[static_cast<Eigen::Index>(i)] = pairing(F, l.joint_twist);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Semigroup operands

/// (g, xi) with (g, xi) (+) (g', xi') = (g g', Ad_g xi' + xi): the affine map
/// x -> Ad_g x + xi. Used by the split velocity and acceleration scans.
struct TransformTwistOperand {
  RigidTransform g;
  Twist xi;

  Twist apply(const Twist& x) const { return adjoint_apply(g, x) + xi; }
};

inline TransformTwistOperand combine_transform_twist(
    const TransformTwistOperand& a, const TransformTwistOperand& b) {
  return {a.g * b.g, adjoint_apply(a.g, b.xi) + a.xi};
}

/// Element (g, xi1, xi2) of SE(3) x se(3)^2. For link i it is
/// (f_{i-1,i}^{-1}, S_i qdd_i, S_i qd_i) and maps (Vdot_{i-1}, V_{i-1}) to
/// (Vdot_i, V_i).
struct VelAccOperand {
  RigidTransform g;
  Twist xi1;
  Twist xi2;

  static VelAccOperand identity() { return {}; }

  /// Applies the operand to (Vdot, V); returns (Vdot', V').
  std::pair<Twist, Twist> apply(const Twist& Vdot, const Twist& V) const {
    const Twist adV = adjoint_apply(g, V);
    return {adjoint_apply(g, Vdot) - lie_bracket(xi2, adV) + xi1, adV + xi2};
  }
};

/// (g, xi1, xi2) (+) (g', xi1', xi2') =
///   (g g', Ad_g xi1' + xi1 - ad_{xi2} Ad_g xi2', Ad_g xi2' + xi2)
inline VelAccOperand combine_velacc(const VelAccOperand& a,
                                    const VelAccOperand& b) {
  const Twist ad_b2 = adjoint_apply(a.g, b.xi2);
  return {a.g * b.g,
          adjoint_apply(a.g, b.xi1) + a.xi1 - lie_bracket(a.xi2, ad_b2),
          ad_b2 + a.xi2};
}

/// (g, xi1, xi2)^-1 = (g^-1, -Ad_{g^-1} xi1, -Ad_{g^-1} xi2)
inline VelAccOperand inverse_velacc(const VelAccOperand& a) {
  const RigidTransform gi = a.g.inverse();
  return {gi, -adjoint_apply(gi, a.xi1), -adjoint_apply(gi, a.xi2)};
}

/// Affine map on (F, tau) pairs:
///   F'   = linear * F + offset
///   tau' = torque_row . F + torque_offset
/// A single link operand has torque_offset = 0; products of operands need it.
struct WrenchTorqueOperand {
  Matrix6d linear = Matrix6d::Identity();
  Vector6d torque_row = Vector6d::Zero();
  Wrench offset;
  double torque_offset = 0.0;

  std::pair<Wrench, double> apply(const Wrench& F) const {
    return {Wrench(linear * F.coeffs) + offset,
            torque_row.dot(F.coeffs) + torque_offset};
  }
};

/// outer (+) inner = outer applied after inner.
inline WrenchTorqueOperand combine_wrench_torque(const WrenchTorqueOperand& outer,
                                                 const WrenchTorqueOperand& inner) {
  WrenchTorqueOperand r;
  r.linear = outer.linear * inner.linear;
  r.torque_row = inner.linear.transpose() * outer.torque_row;
  r.offset = Wrench(outer.linear * inner.offset.coeffs) + outer.offset;
  r.torque_offset = outer.torque_row.dot(inner.offset.coeffs) + outer.torque_offset;
  return r;
}

/// Generic x -> linear * x + offset of dimension D; the dense form of the
/// (D+1)x(D+1) homogeneous scan operands.
template <int D>
struct AffineOperand {
  using Matrix = Eigen::Matrix<double, D, D>;
  using Vector = Eigen::Matrix<double, D, 1>;

  Matrix linear = Matrix::Identity();
  Vector offset = Vector::Zero();

  static AffineOperand identity() { return {}; }

  Vector apply(const Vector& x) const { return linear * x + offset; }

  Eigen::Matrix<double, D + 1, D + 1> homogeneous() const {
    Eigen::Matrix<double, D + 1, D + 1> h =
        Eigen::Matrix<double, D + 1, D + 1>::Zero();
    h.template topLeftCorner<D, D>() = linear;
    h.template topRightCorner<D, 1>() = offset;
    h(D, D) = 1.0;
    return h;
  }
};

template <int D>
AffineOperand<D> combine_affine(const AffineOperand<D>& outer,
                                const AffineOperand<D>& inner) {
  return {outer.linear * inner.linear, outer.linear * inner.offset + outer.offset};
}

/// Semigroup for operands that act on the state from the left: a scan element
/// covering a later link is applied after the accumulated prefix.
template <typename T, typename Compose>
auto left_acting_semigroup(Compose compose) {
  auto combine = [compose](const T& earlier, const T& later) {
    return compose(later, earlier);
  };
  return make_semigroup<T>(combine);
}

// ---------------------------------------------------------------------------
// Scan pipelines

/// Test hook: lets fault-injection code tamper with scan operands.
struct IdScanHooks {
  std::function<void(std::vector<TransformTwistOperand>&)> velocity_operands;
};

namespace detail {

// Backward scan over (F_i, tau_{i+1}) for i = 0..n. Operand i maps
// (F_{i+1}, tau_{i+2}) to (F_i, tau_{i+1}); index 0 has zero bias force and
// yields the base reaction F_0 together with tau_1.
inline void backward_force_scan(const ChainModel& model,
                                const std::vector<RigidTransform>& f,
                                const std::vector<Wrench>& fhat,
                                const Wrench& tip, const ScanPlan& plan,
                                DynamicsResult& r, ScanStats* stats = nullptr) {
  const std::size_t n = model.size();
  std::vector<WrenchTorqueOperand> ops(n + 1);
  parallel_map(plan, n + 1, [&](std::size_t i) {
    WrenchTorqueOperand& op = ops[i];
    if (i < n) {
      op.linear = adjoint(f[i].inverse()).transpose();
      op.torque_row = model.links[i].joint_twist.coeffs;
    }
    op.offset = i == 0 ? Wrench::Zero() : fhat[i - 1];
  });
  // ops[i] above is indexed by the frame it produces: ops[0] yields F_0 from
  // F_1 via f_{0,1}; ops[n] yields F_n from the tip wrench (f_{n,n+1} = I).
  const auto sg = left_acting_semigroup<WrenchTorqueOperand>(
      [](const WrenchTorqueOperand& a, const WrenchTorqueOperand& b) {
        return combine_wrench_torque(a, b);
      });
  const auto prefix = inclusive_scan(std::move(ops), sg,
                                     plan.with_direction(ScanDirection::backward),
                                     stats);
  r.F.resize(n);
  r.tau.resize(static_cast<Eigen::Index>(n));
  parallel_map(plan, n, [&](std::size_t i) {
    r.F[i] = prefix[i + 1].apply(tip).first;
    // Torque lag: the state produced at index i carries tau_{i+1}.
    r.tau[static_cast<Eigen::Index>(i)] = prefix[i].apply(tip).second;
  });
}

inline std::vector<Wrench> bias_forces(const ChainModel& model,
                                       const DynamicsResult& r,
                                       const ScanPlan& plan) {
  std::vector<Wrench> fhat(model.size());
  parallel_map(plan, model.size(), [&](std::size_t i) {
    fhat[i] = bias_force(model.links[i].inertia, r.V[i], r.Vdot[i]);
  });
  return fhat;
}

}  // namespace detail

/// Split pipeline: transforms, velocity scan, acceleration scan, bias forces,
/// backward force scan, torques.
inline DynamicsResult id_scan(const ChainModel& model, const DynamicsInput& in,
                              const ScanPlan& plan,
                              const IdScanHooks* hooks = nullptr) {
  check_input_sizes(model, in, false);
  const std::size_t n = model.size();
  const auto f = link_transforms(model, in.q, plan);
  const auto sg = left_acting_semigroup<TransformTwistOperand>(
      [](const TransformTwistOperand& a, const TransformTwistOperand& b) {
        return combine_transform_twist(a, b);
      });
  const ScanPlan fwd = plan.with_direction(ScanDirection::forward);

  DynamicsResult r;
  r.qdd = in.qdd;
  r.V.resize(n);
  r.Vdot.resize(n);

  std::vector<TransformTwistOperand> vel_ops(n);
  detail::parallel_map(plan, n, [&](std::size_t i) {
    vel_ops[i] = {f[i].inverse(),
                  model.links[i].joint_twist * in.qd[static_cast<Eigen::Index>(i)]};
  });
  if (hooks && hooks->velocity_operands) hooks->velocity_operands(vel_ops);
  const auto g_inv = [&] {
    std::vector<RigidTransform> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = vel_ops[i].g;
    return g;
  }();
  const auto vel = inclusive_scan(std::move(vel_ops), sg, fwd);
  detail::parallel_map(plan, n, [&](std::size_t i) {
    r.V[i] = vel[i].apply(in.base_velocity);
  });

  std::vector<TransformTwistOperand> acc_ops(n);
  detail::parallel_map(plan, n, [&](std::size_t i) {
    const auto k = static_cast<Eigen::Index>(i);
    const Twist& S = model.links[i].joint_twist;
    const Twist& V_prev = i == 0 ? in.base_velocity : r.V[i - 1];
    acc_ops[i] = {g_inv[i], S * in.qdd[k] - lie_bracket(S * in.qd[k],
                                                        adjoint_apply(g_inv[i], V_prev))};
  });
  const auto acc = inclusive_scan(std::move(acc_ops), sg, fwd);
  detail::parallel_map(plan, n, [&](std::size_t i) {
    r.Vdot[i] = acc[i].apply(in.base_acceleration);
  });

  const auto fhat = detail::bias_forces(model, r, plan);
  detail::backward_force_scan(model, f, fhat, in.tip_force, plan, r);
  return r;
}

enum class FusedForm {
  velacc,       // one scan over SE(3) x se(3)^2, bias forces mapped afterwards
  synchronous,  // one dense scan that also carries Q_i and Fhat_i
};

/// Dense forward operand on x = (Vdot, Q, V, Fhat): 27 states plus the
/// homogeneous coordinate.
using SynchronousOperand = AffineOperand<27>;

namespace sync_layout {
inline constexpr int kVdot = 0, kQ = 6, kV = 15, kFhat = 21, kDim = 27;
}

/// Builds the synchronous operand for one link from g = f_{i-1,i}^{-1},
/// xi1 = S qdd, xi2 = S qd and the link inertia. Q_i and Fhat_i depend on
/// (Q_{i-1}, V_{i-1}, Vdot_{i-1}) linearly; the Fhat_{i-1} column is zero.
inline SynchronousOperand make_synchronous_operand(const RigidTransform& g,
                                                   const Twist& xi1,
                                                   const Twist& xi2,
                                                   const SpatialInertia& J) {
  using namespace sync_layout;
  SynchronousOperand op;
  op.linear.setZero();
  op.offset.setZero();

  const Matrix6d A = adjoint(g);
  const Matrix3d& R = g.rotation;
  const Vector3d& p = g.translation;
  const Vector3d nu = xi2.linear(), om = xi2.angular();

  // Vdot_i = A Vdot + (-ad_{xi2} A) V + xi1
  op.linear.block<6, 6>(kVdot, kVdot) = A;
  op.linear.block<6, 6>(kVdot, kV) = -ad_small(xi2) * A;
  op.offset.segment<6>(kVdot) = xi1.coeffs;

  // V_i = A V + xi2
  op.linear.block<6, 6>(kV, kV) = A;
  op.offset.segment<6>(kV) = xi2.coeffs;

  // Q_i. With b = R w, a = R v + p x R w: w_i = b + om, v_i = a + nu.
  //   w_i x v_i = R (w x v) + p tr(W) - R W R^T p + b x nu + om x a + om x nu
  //   w_i w_i^T = R W R^T + b om^T + om b^T + om om^T,   W = w w^T.
  auto sym_basis = [](int k) {
    const auto [a, b] = kSymPairs[static_cast<std::size_t>(k)];
    Matrix3d E = Matrix3d::Zero();
    E(a, b) = 1.0;
    E(b, a) = 1.0;
    return E;
  };
  auto upper = [](const Matrix3d& M) {
    Eigen::Matrix<double, 6, 1> u;
    for (int k = 0; k < 6; ++k) {
      const auto [a, b] = kSymPairs[static_cast<std::size_t>(k)];
      u[k] = M(a, b);
    }
    return u;
  };

  op.linear.block<3, 3>(kQ, kQ) = R;
  for (int k = 0; k < 6; ++k) {
    const Matrix3d E = sym_basis(k);
    const Matrix3d RER = R * E * R.transpose();
    op.linear.block<3, 1>(kQ, kQ + 3 + k) = p * E.trace() - RER * p;
    op.linear.block<6, 1>(kQ + 3, kQ + 3 + k) = upper(RER);
  }
  // Linear-in-V terms of w_i x v_i: om x (R v) on v; (-[nu] R + [om][p] R) on w.
  op.linear.block<3, 3>(kQ, kV) = skew(om) * R;
  op.linear.block<3, 3>(kQ, kV + 3) = -skew(nu) * R + skew(om) * skew(p) * R;
  op.offset.segment<3>(kQ) = om.cross(nu);
  // Linear-in-w terms of w_i w_i^T: entry (a,b) gets R_a. om_b + om_a R_b.
  for (int k = 0; k < 6; ++k) {
    const auto [a, b] = kSymPairs[static_cast<std::size_t>(k)];
    op.linear.block<1, 3>(kQ + 3 + k, kV + 3) =
        om[b] * R.row(a) + om[a] * R.row(b);
    op.offset[kQ + 3 + k] = om[a] * om[b];
  }

  // Fhat_i = J Vdot_i + L Q_i
  const Eigen::Matrix<double, 6, 9> L = bias_quadratic_map(J);
  op.linear.block<6, kDim>(kFhat, 0) =
      J.matrix() * op.linear.block<6, kDim>(kVdot, 0) +
      L * op.linear.block<9, kDim>(kQ, 0);
  op.offset.segment<6>(kFhat) = J.matrix() * op.offset.segment<6>(kVdot) +
                                L * op.offset.segment<9>(kQ);
  return op;
}

/// Fused forward phase (one scan) followed by the backward force scan.
inline DynamicsResult id_scan_fused(const ChainModel& model,
                                    const DynamicsInput& in,
                                    const ScanPlan& plan,
                                    FusedForm form = FusedForm::velacc) {
  check_input_sizes(model, in, false);
  const std::size_t n = model.size();
  const auto f = link_transforms(model, in.q, plan);
  const ScanPlan fwd = plan.with_direction(ScanDirection::forward);

  DynamicsResult r;
  r.qdd = in.qdd;
  r.V.resize(n);
  r.Vdot.resize(n);
  std::vector<Wrench> fhat(n);

  if (form == FusedForm::velacc) {
    std::vector<VelAccOperand> ops(n);
    detail::parallel_map(plan, n, [&](std::size_t i) {
      const auto k = static_cast<Eigen::Index>(i);
      const Twist& S = model.links[i].joint_twist;
      ops[i] = {f[i].inverse(), S * in.qdd[k], S * in.qd[k]};
    });
    const auto sg = left_acting_semigroup<VelAccOperand>(
        [](const VelAccOperand& a, const VelAccOperand& b) {
          return combine_velacc(a, b);
        });
    const auto prefix = inclusive_scan(std::move(ops), sg, fwd);
    detail::parallel_map(plan, n, [&](std::size_t i) {
      std::tie(r.Vdot[i], r.V[i]) =
          prefix[i].apply(in.base_acceleration, in.base_velocity);
    });
    fhat = detail::bias_forces(model, r, plan);
  } else {
    using namespace sync_layout;
    std::vector<SynchronousOperand> ops(n);
    detail::parallel_map(plan, n, [&](std::size_t i) {
      const auto k = static_cast<Eigen::Index>(i);
      const LinkSpec& l = model.links[i];
      ops[i] = make_synchronous_operand(f[i].inverse(), l.joint_twist * in.qdd[k],
                                        l.joint_twist * in.qd[k], l.inertia);
    });
    const auto sg = left_acting_semigroup<SynchronousOperand>(
        [](const SynchronousOperand& a, const SynchronousOperand& b) {
          return combine_affine(a, b);
        });
    const auto prefix = inclusive_scan(std::move(ops), sg, fwd);
    SynchronousOperand::Vector seed = SynchronousOperand::Vector::Zero();
    seed.segment<6>(kVdot) = in.base_acceleration.coeffs;
    seed.segment<9>(kQ) = bias_quadratics(in.base_velocity);
    seed.segment<6>(kV) = in.base_velocity.coeffs;
    detail::parallel_map(plan, n, [&](std::size_t i) {
      const SynchronousOperand::Vector x = prefix[i].apply(seed);
      r.Vdot[i] = Twist(x.segment<6>(kVdot));
      r.V[i] = Twist(x.segment<6>(kV));
      fhat[i] = Wrench(x.segment<6>(kFhat));
    });
  }

  detail::backward_force_scan(model, f, fhat, in.tip_force, plan, r);
  return r;
}

// ---------------------------------------------------------------------------
// Batches

enum class IdAlgorithm { recursive, scan, scan_fused, scan_synchronous };

inline DynamicsResult inverse_dynamics(const ChainModel& model,
                                       const DynamicsInput& in,
                                       IdAlgorithm algo, const ScanPlan& plan) {
  switch (algo) {
    case IdAlgorithm::recursive: return id_recursive(model, in);
    case IdAlgorithm::scan: return id_scan(model, in, plan);
    case IdAlgorithm::scan_fused: return id_scan_fused(model, in, plan);
    case IdAlgorithm::scan_synchronous:
      return id_scan_fused(model, in, plan, FusedForm::synchronous);
  }
  throw std::invalid_argument("unknown inverse dynamics algorithm");
}

/// Per-group outcome of a batch: either a value or the error message.
template <typename T>
struct BatchEntry {
  std::optional<T> value;
  std::string error;

  bool ok() const { return value.has_value(); }
};

/// Evaluates independent groups concurrently. The plan's workers are spent
/// across groups; each group runs its scans on a single worker, which keeps
/// results independent of the worker count.
template <typename Result, typename Eval>
std::vector<BatchEntry<Result>> run_batch(std::size_t count,
                                          const ScanPlan& plan, Eval&& eval) {
  if (plan.worker_count == 0) {
    throw std::invalid_argument("batch: worker_count must be positive");
  }
  std::vector<BatchEntry<Result>> out(count);
  const ScanPlan inner = plan.with_workers(1);
  parallel_for(count, plan.worker_count, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      try {
        out[i].value = eval(i, inner);
      } catch (const std::exception& ex) {
        out[i].error = ex.what();
      }
    }
  });
  return out;
}

inline std::vector<BatchEntry<DynamicsResult>> id_batch(
    const ChainModel& model, const std::vector<DynamicsInput>& inputs,
    IdAlgorithm algo, const ScanPlan& plan) {
  return run_batch<DynamicsResult>(
      inputs.size(), plan, [&](std::size_t i, const ScanPlan& inner) {
        return inverse_dynamics(model, inputs[i], algo, inner);
      });
}

}  // namespace scandyn
