#pragma once

// Forward dynamics: the joint-space-inertia inversion algorithm (bias torque
// plus n inverse-dynamics columns and an SPD solve) and the articulated-body
// inertia algorithm with its backward/forward phases run as prefix scans.

#include "scandyn/inverse_dynamics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <future>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace scandyn {

using MatrixXd = Eigen::MatrixXd;
using JointSpaceInertia = MatrixXd;

inline constexpr double kPivotEpsilon = 1e-12;

/// Joint space inertia is not positive definite.
class FactorizationError : public std::runtime_error {
 public:
  explicit FactorizationError(double smallest_pivot)
      : std::runtime_error("joint space inertia is not positive definite "
                           "(smallest pivot " +
                           std::to_string(smallest_pivot) + ")"),
        smallest_pivot_(smallest_pivot) {}
  double smallest_pivot() const { return smallest_pivot_; }

 private:
  double smallest_pivot_;
};

/// S^T Jhat S vanished for some joint.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(std::size_t link, double omega)
      : std::runtime_error("articulated inertia singular at link " +
                           std::to_string(link) + " (S^T Jhat S = " +
                           std::to_string(omega) + ")"),
        link_(link) {}
  std::size_t link() const { return link_; }

 private:
  std::size_t link_;
};

// ---------------------------------------------------------------------------
// JSI inversion

/// tau_bias = ID(q, qd, 0, V0, Vdot0, F_{n+1}).
inline VectorXd bias_torque(const ChainModel& model, const DynamicsInput& in,
                            IdAlgorithm algo = IdAlgorithm::recursive,
                            const ScanPlan& plan = {}) {
  DynamicsInput zero_acc = in;
  zero_acc.qdd = VectorXd::Zero(in.q.size());
  return inverse_dynamics(model, zero_acc, algo, plan).tau;
}

namespace detail {

// Inputs for the n+1 inverse dynamics calls: index 0 is the bias torque,
// index j+1 is ID(q, 0, e_j, 0, 0, 0).
inline std::vector<DynamicsInput> jsiia_inputs(const DynamicsInput& in,
                                               bool include_bias) {
  const auto n = in.q.size();
  std::vector<DynamicsInput> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  if (include_bias) {
    DynamicsInput b = in;
    b.qdd = VectorXd::Zero(n);
    out.push_back(std::move(b));
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    DynamicsInput c = DynamicsInput::zeros(static_cast<std::size_t>(n));
    c.q = in.q;
    c.qdd[j] = 1.0;
    out.push_back(std::move(c));
  }
  return out;
}

template <typename T>
std::vector<T> unwrap(std::vector<BatchEntry<T>> entries) {
  std::vector<T> out;
  out.reserve(entries.size());
  for (auto& e : entries) {
    if (!e.ok()) throw std::runtime_error(e.error);
    out.push_back(std::move(*e.value));
  }
  return out;
}

}  // namespace detail

/// M(q) column by column: M e_j = ID(q, 0, e_j, 0, 0, 0). Columns are
/// independent and run concurrently on the plan's workers.
inline JointSpaceInertia jsi_columns(const ChainModel& model, const VectorXd& q,
                                     const ScanPlan& plan = {}) {
  DynamicsInput base = DynamicsInput::zeros(model.size());
  base.q = q;
  check_input_sizes(model, base, false);
  const auto inputs = detail::jsiia_inputs(base, false);
  const auto cols = detail::unwrap(id_batch(model, inputs,
                                            IdAlgorithm::scan, plan));
  const auto n = static_cast<Eigen::Index>(model.size());
  JointSpaceInertia M(n, n);
  for (Eigen::Index j = 0; j < n; ++j) M.col(j) = cols[static_cast<std::size_t>(j)].tau;
  return M;
}

/// Solves M x = b by Cholesky; throws FactorizationError with the smallest
/// LDL^T pivot when M is not positive definite.
inline VectorXd spd_solve(const JointSpaceInertia& M, const VectorXd& b) {
  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    Eigen::LDLT<MatrixXd> ldlt(M);
    throw FactorizationError(ldlt.vectorD().minCoeff());
  }
  return llt.solve(b);
}

struct FdResult {
  VectorXd qdd;
};

/// qdd = M(q)^{-1} (tau - tau_bias); the n+1 inverse dynamics calls run as one
/// batch.
inline FdResult fd_jsiia(const ChainModel& model, const DynamicsInput& in,
                         const ScanPlan& plan = {}) {
  check_input_sizes(model, in, true);
  const auto inputs = detail::jsiia_inputs(in, true);
  const auto results = detail::unwrap(
      id_batch(model, inputs, IdAlgorithm::scan, plan));
  const auto n = static_cast<Eigen::Index>(model.size());
  JointSpaceInertia M(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    M.col(j) = results[static_cast<std::size_t>(j) + 1].tau;
  }
  return {spd_solve(M, in.applied_torques - results[0].tau)};
}

// ---------------------------------------------------------------------------
// Articulated-body inertia

struct ArticulatedInertiaSet {
  std::vector<Matrix6d> Jhat;
};

/// Descending recursion
///   Jhat_i = J_i + X^T Jhat_{i+1} X - X^T Jhat_{i+1} S S^T Jhat_{i+1} X / (S^T Jhat_{i+1} S)
/// with X = Ad_{f_{i,i+1}^{-1}}, S = S_{i+1}. Each step is re-symmetrized.
inline ArticulatedInertiaSet abi_recursion(const ChainModel& model,
                                           const std::vector<RigidTransform>& f) {
  const std::size_t n = model.size();
  ArticulatedInertiaSet out;
  out.Jhat.resize(n);
  out.Jhat[n - 1] = model.links[n - 1].inertia.matrix();
  for (std::size_t i = n - 1; i-- > 0;) {
    const Matrix6d& next = out.Jhat[i + 1];
    const Vector6d& S = model.links[i + 1].joint_twist.coeffs;
    const Vector6d JS = next * S;
    const double omega = S.dot(JS);
    if (!(omega > kPivotEpsilon)) throw SingularityError(i + 1, omega);
    const Matrix6d X = adjoint(f[i + 1].inverse());
    const Matrix6d projected = next - JS * JS.transpose() / omega;
    Matrix6d Jhat = model.links[i].inertia.matrix() + X.transpose() * projected * X;
    out.Jhat[i] = 0.5 * (Jhat + Jhat.transpose());
  }
  const Vector6d& S0 = model.links[0].joint_twist.coeffs;
  const double omega0 = S0.dot(out.Jhat[0] * S0);
  if (!(omega0 > kPivotEpsilon)) throw SingularityError(0, omega0);
  return out;
}

inline ArticulatedInertiaSet abi_recursion(const ChainModel& model,
                                           const VectorXd& q) {
  if (q.size() != static_cast<Eigen::Index>(model.size()) || model.size() == 0) {
    throw std::invalid_argument("abi_recursion: q does not match the model");
  }
  return abi_recursion(model, link_transforms(model, q));
}

/// Per-joint quantities of the ABIA propagation. Arrays are 0-based by link;
/// Y[k] and Pi[k] couple link k to its parent, i.e. they are built from
/// Jhat[k], S[k] and f_{k-1,k}.
struct AbiaIntermediates {
  std::vector<Matrix6d> Y;
  std::vector<Vector6d> Pi;
  std::vector<double> Omega;
  std::vector<Vector6d> zhat;
  std::vector<double> c;
  std::vector<double> chat;
  // chat as carried by the backward scan state. The merged scan never
  // produces chat of the first link, so chat_scanned[0] is NaN there.
  std::vector<double> chat_scanned;
  std::vector<Vector6d> lambda;
  VectorXd tau_diff;
  VectorXd qdd;
  VectorXd qdd_scanned;  // carried by the forward scan state
};

/// Seven-dimensional affine operand: (6-vector, scalar) states of the ABIA
/// backward and forward scans.
using AbiaOperand = AffineOperand<7>;
/// Fourteen-dimensional operand of the merged backward scan; state layout
/// (F, tau_hat, zhat, chat).
using MergedOperand = AffineOperand<14>;

namespace merged_layout {
inline constexpr int kF = 0, kTauHat = 6, kZhat = 7, kChat = 13;
}

namespace detail {

inline void fill_abia_maps(const ChainModel& model,
                           const std::vector<RigidTransform>& f,
                           const ArticulatedInertiaSet& abi,
                           const ScanPlan& plan, AbiaIntermediates& out) {
  const std::size_t n = model.size();
  out.Y.resize(n);
  out.Pi.resize(n);
  out.Omega.resize(n);
  parallel_map(plan, n, [&](std::size_t k) {
    const Vector6d& S = model.links[k].joint_twist.coeffs;
    const Vector6d JS = abi.Jhat[k] * S;
    const double omega = S.dot(JS);
    if (!(omega > kPivotEpsilon)) throw SingularityError(k, omega);
    const Matrix6d Xt = adjoint(f[k].inverse()).transpose();
    out.Omega[k] = omega;
    out.Y[k] = Xt * (Matrix6d::Identity() - JS * S.transpose() / omega);
    out.Pi[k] = Xt * JS / omega;
  });
}

inline auto affine_semigroup7() {
  return left_acting_semigroup<AbiaOperand>(
      [](const AbiaOperand& a, const AbiaOperand& b) { return combine_affine(a, b); });
}

// chat_k = Omega_k^{-1} (tau_diff_k - S_k^T zhat_k)
inline void chat_map(const ChainModel& model, const ScanPlan& plan,
                     AbiaIntermediates& out) {
  const std::size_t n = model.size();
  out.c.resize(n);
  out.chat.resize(n);
  parallel_map(plan, n, [&](std::size_t k) {
    const Vector6d& S = model.links[k].joint_twist.coeffs;
    out.c[k] = out.tau_diff[static_cast<Eigen::Index>(k)] - S.dot(out.zhat[k]);
    out.chat[k] = out.c[k] / out.Omega[k];
  });
}

// Forward scan over (lambda_i, qdd_i), seed lambda_0 = qdd_0 = 0, followed by
// qdd_i = chat_i - Pi_{i-1,i}^T lambda_{i-1}.
inline void lambda_scan(const ChainModel& model, const ScanPlan& plan,
                        AbiaIntermediates& out) {
  const std::size_t n = model.size();
  std::vector<AbiaOperand> ops(n);
  parallel_map(plan, n, [&](std::size_t k) {
    AbiaOperand& op = ops[k];
    op.linear.setZero();
    op.linear.topLeftCorner<6, 6>() = out.Y[k].transpose();
    op.linear.block<1, 6>(6, 0) = -out.Pi[k].transpose();
    op.offset.head<6>() = model.links[k].joint_twist.coeffs * out.chat[k];
    op.offset[6] = out.chat[k];
  });
  const auto prefix = inclusive_scan(std::move(ops), affine_semigroup7(),
                                     plan.with_direction(ScanDirection::forward));
  out.lambda.resize(n);
  out.qdd.resize(static_cast<Eigen::Index>(n));
  out.qdd_scanned.resize(static_cast<Eigen::Index>(n));
  parallel_map(plan, n, [&](std::size_t k) {
    out.lambda[k] = prefix[k].offset.head<6>();
    out.qdd_scanned[static_cast<Eigen::Index>(k)] = prefix[k].offset[6];
  });
  parallel_map(plan, n, [&](std::size_t k) {
    const double coupling = k == 0 ? 0.0 : out.Pi[k].dot(out.lambda[k - 1]);
    out.qdd[static_cast<Eigen::Index>(k)] = out.chat[k] - coupling;
  });
}

// Runs the bias-torque pipeline and the ABI recursion as two tasks.
template <typename BiasTask>
auto bias_and_abi(const ChainModel& model, const std::vector<RigidTransform>& f,
                  const ScanPlan& plan, BiasTask&& bias_task) {
  if (plan.worker_count >= 2) {
    auto abi = std::async(std::launch::async, [&] { return abi_recursion(model, f); });
    auto bias = bias_task(plan.with_workers(plan.worker_count - 1));
    return std::pair{std::move(bias), abi.get()};
  }
  auto bias = bias_task(plan);
  return std::pair{std::move(bias), abi_recursion(model, f)};
}

}  // namespace detail

/// All ABIA stages; fd_abia returns the qdd field.
inline AbiaIntermediates abia_intermediates(const ChainModel& model,
                                            const DynamicsInput& in,
                                            const ScanPlan& plan = {}) {
  check_input_sizes(model, in, true);
  const std::size_t n = model.size();
  const auto f = link_transforms(model, in.q, plan);

  auto [tau_bias, abi] = detail::bias_and_abi(model, f, plan, [&](const ScanPlan& p) {
    return bias_torque(model, in, IdAlgorithm::scan, p);
  });

  AbiaIntermediates out;
  out.tau_diff = in.applied_torques - tau_bias;
  detail::fill_abia_maps(model, f, abi, plan, out);

  // Backward scan over (zhat_i, chat_{i+1}) for i = 0..n; operand i uses the
  // successor link i+1 and is zero for i = n (zhat_{n+1} = chat_{n+2} = 0).
  std::vector<AbiaOperand> ops(n + 1);
  detail::parallel_map(plan, n + 1, [&](std::size_t i) {
    AbiaOperand& op = ops[i];
    op.linear.setZero();
    op.offset.setZero();
    if (i == n) return;
    const Vector6d& S = model.links[i].joint_twist.coeffs;
    const double inv_omega = 1.0 / out.Omega[i];
    const double tau_hat = out.tau_diff[static_cast<Eigen::Index>(i)];
    op.linear.topLeftCorner<6, 6>() = out.Y[i];
    op.linear.block<1, 6>(6, 0) = -inv_omega * S.transpose();
    op.offset.head<6>() = out.Pi[i] * tau_hat;
    op.offset[6] = inv_omega * tau_hat;
  });
  const auto prefix = inclusive_scan(std::move(ops), detail::affine_semigroup7(),
                                     plan.with_direction(ScanDirection::backward));
  out.zhat.resize(n);
  out.chat_scanned.resize(n);
  detail::parallel_map(plan, n, [&](std::size_t k) {
    out.zhat[k] = prefix[k + 1].offset.head<6>();
    out.chat_scanned[k] = prefix[k].offset[6];
  });

  detail::chat_map(model, plan, out);
  detail::lambda_scan(model, plan, out);
  return out;
}

inline FdResult fd_abia(const ChainModel& model, const DynamicsInput& in,
                        const ScanPlan& plan = {}) {
  return {abia_intermediates(model, in, plan).qdd};
}

/// Builds operand j (0-based, j = 0..n) of the merged backward scan. Operand
/// j maps (F_{j+1}, tau_hat_{j+2}, zhat_{j+2}, chat_{j+3}) to
/// (F_j, tau_hat_{j+1}, zhat_{j+1}, chat_{j+2}) in 1-based link numbering.
///
/// The tau_hat row carries the applied torque as its offset: with F the
/// zero-acceleration joint force, tau_hat_i = tau_in_i - S_i^T F_i.
inline MergedOperand make_merged_operand(std::size_t j, const ChainModel& model,
                                         const std::vector<RigidTransform>& f,
                                         const std::vector<Wrench>& fhat,
                                         const VectorXd& tau_in,
                                         const AbiaIntermediates& abia) {
  using namespace merged_layout;
  const std::size_t n = model.size();
  MergedOperand op;
  op.linear.setZero();
  op.offset.setZero();
  if (j < n) {
    op.linear.block<6, 6>(kF, kF) = adjoint(f[j].inverse()).transpose();
    op.linear.block<1, 6>(kTauHat, kF) = -model.links[j].joint_twist.coeffs.transpose();
    op.offset[kTauHat] = tau_in[static_cast<Eigen::Index>(j)];
  } else {
    op.linear.block<6, 6>(kF, kF) = Matrix6d::Identity();
  }
  if (j >= 1) op.offset.segment<6>(kF) = fhat[j - 1].coeffs;
  if (j + 1 < n) {
    const std::size_t s = j + 1;
    const double inv_omega = 1.0 / abia.Omega[s];
    op.linear.block<6, 1>(kZhat, kTauHat) = abia.Pi[s];
    op.linear.block<6, 6>(kZhat, kZhat) = abia.Y[s];
    op.linear(kChat, kTauHat) = inv_omega;
    op.linear.block<1, 6>(kChat, kZhat) =
        -inv_omega * model.links[s].joint_twist.coeffs.transpose();
  }
  return op;
}

/// ABIA with the inverse-dynamics force scan and the zhat/chat scan merged
/// into one backward scan.
inline AbiaIntermediates abia_merged_intermediates(const ChainModel& model,
                                                   const DynamicsInput& in,
                                                   const ScanPlan& plan = {}) {
  using namespace merged_layout;
  check_input_sizes(model, in, true);
  const std::size_t n = model.size();
  const auto f = link_transforms(model, in.q, plan);

  // Forward phase of the zero-acceleration inverse dynamics and bias forces.
  auto [fhat, abi] = detail::bias_and_abi(model, f, plan, [&](const ScanPlan& p) {
    DynamicsInput zero_acc = in;
    zero_acc.qdd = VectorXd::Zero(in.q.size());
    std::vector<VelAccOperand> ops(n);
    detail::parallel_map(p, n, [&](std::size_t i) {
      const auto k = static_cast<Eigen::Index>(i);
      ops[i] = {f[i].inverse(), Twist::Zero(), model.links[i].joint_twist * in.qd[k]};
    });
    const auto sg = left_acting_semigroup<VelAccOperand>(
        [](const VelAccOperand& a, const VelAccOperand& b) { return combine_velacc(a, b); });
    const auto prefix = inclusive_scan(std::move(ops), sg,
                                       p.with_direction(ScanDirection::forward));
    DynamicsResult r;
    r.V.resize(n);
    r.Vdot.resize(n);
    detail::parallel_map(p, n, [&](std::size_t i) {
      std::tie(r.Vdot[i], r.V[i]) =
          prefix[i].apply(zero_acc.base_acceleration, zero_acc.base_velocity);
    });
    return detail::bias_forces(model, r, p);
  });

  AbiaIntermediates out;
  detail::fill_abia_maps(model, f, abi, plan, out);

  std::vector<MergedOperand> ops(n + 1);
  detail::parallel_map(plan, n + 1, [&](std::size_t j) {
    ops[j] = make_merged_operand(j, model, f, fhat, in.applied_torques, out);
  });
  const auto sg = left_acting_semigroup<MergedOperand>(
      [](const MergedOperand& a, const MergedOperand& b) { return combine_affine(a, b); });
  const auto prefix = inclusive_scan(std::move(ops), sg,
                                     plan.with_direction(ScanDirection::backward));
  MergedOperand::Vector seed = MergedOperand::Vector::Zero();
  seed.segment<6>(kF) = in.tip_force.coeffs;

  out.tau_diff.resize(static_cast<Eigen::Index>(n));
  out.zhat.resize(n);
  out.chat_scanned.resize(n);
  detail::parallel_map(plan, n, [&](std::size_t k) {
    const MergedOperand::Vector x = prefix[k].apply(seed);
    out.tau_diff[static_cast<Eigen::Index>(k)] = x[kTauHat];
    out.zhat[k] = x.segment<6>(kZhat);
    // State k carries chat_{k+2} (1-based), i.e. chat of 0-based link k+1.
    if (k + 1 < n) out.chat_scanned[k + 1] = x[kChat];
  });
  if (n > 0) out.chat_scanned[0] = std::numeric_limits<double>::quiet_NaN();

  detail::chat_map(model, plan, out);
  detail::lambda_scan(model, plan, out);
  return out;
}

inline FdResult fd_abia_merged(const ChainModel& model, const DynamicsInput& in,
                               const ScanPlan& plan = {}) {
  return {abia_merged_intermediates(model, in, plan).qdd};
}

// ---------------------------------------------------------------------------
// Batches

enum class FdAlgorithm { jsiia, abia, abia_merged };

inline FdResult forward_dynamics(const ChainModel& model, const DynamicsInput& in,
                                 FdAlgorithm algo, const ScanPlan& plan) {
  switch (algo) {
    case FdAlgorithm::jsiia: return fd_jsiia(model, in, plan);
    case FdAlgorithm::abia: return fd_abia(model, in, plan);
    case FdAlgorithm::abia_merged: return fd_abia_merged(model, in, plan);
  }
  throw std::invalid_argument("unknown forward dynamics algorithm");
}

inline std::vector<BatchEntry<FdResult>> fd_batch(
    const ChainModel& model, const std::vector<DynamicsInput>& inputs,
    FdAlgorithm algo, const ScanPlan& plan) {
  return run_batch<FdResult>(inputs.size(), plan,
                             [&](std::size_t i, const ScanPlan& inner) {
                               return forward_dynamics(model, inputs[i], algo, inner);
                             });
}

}  // namespace scandyn
