#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace scandyn;
using oracle::rel;

namespace {

TEST(ExpTwist, ZeroTwistIsIdentity) {
  for (double theta : {0.0, 1.0, -3.7, 100.0}) {
    EXPECT_EQ(exp_twist(Twist::Zero(), theta), RigidTransform::Identity());
  }
}

TEST(ExpTwist, QuarterTurnAboutZ) {
  const auto g = exp_twist(Twist(Vector3d::Zero(), Vector3d::UnitZ()), std::numbers::pi / 2);
  Matrix3d expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LT((g.rotation - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(g.translation.norm(), 1e-15);
}

TEST(ExpTwist, PureTranslation) {
  const auto g = exp_twist(Twist(Vector3d::UnitX(), Vector3d::Zero()), 2.5);
  EXPECT_EQ(g.rotation, Matrix3d::Identity());
  EXPECT_EQ(g.translation, Vector3d(2.5, 0, 0));
}

TEST(ExpTwist, MatchesMatrixExponential) {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    Vector6d xi = oracle::random_vector6(rng, 2.0);
    if (t % 4 == 0) xi.tail<3>() *= 1e-8;  // near-zero rotation branch
    const double theta = rng.uniform(-3.0, 3.0);
    const auto g = exp_twist(Twist(xi), theta);
    EXPECT_LT(rel(g.matrix(), oracle::exp_matrix(xi, theta)), 1e-12) << "trial " << t;
    EXPECT_LT(orthonormality_error(g.rotation), 1e-12);
  }
}

TEST(RigidTransform, ComposeAndInverse) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto g = oracle::random_transform(rng), h = oracle::random_transform(rng);
    EXPECT_LT(rel((g * h).matrix(), oracle::homogeneous(g) * oracle::homogeneous(h)), 1e-14);
    EXPECT_LT(rel((g * g.inverse()).matrix(), Eigen::Matrix4d::Identity()), 1e-14);
    const Vector3d x = rng.uniform_vector(-1, 1);
    EXPECT_LT((g.apply(x) - (oracle::homogeneous(g) * x.homogeneous()).head<3>()).norm(), 1e-14);
  }
}

TEST(Adjoint, IdentityTransform) {
  EXPECT_EQ(adjoint(RigidTransform::Identity()), Matrix6d::Identity());
}

TEST(Adjoint, InverseGivesIdentity) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto g = oracle::random_transform(rng);
    EXPECT_LT(rel(adjoint(g) * adjoint(g.inverse()), Matrix6d::Identity()), 1e-12);
  }
}

TEST(Adjoint, MatchesConjugation) {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const auto g = oracle::random_transform(rng);
    EXPECT_LT(rel(adjoint(g), oracle::adjoint_by_conjugation(g)), 1e-13);
    const Twist xi(oracle::random_vector6(rng));
    EXPECT_LT(rel(adjoint_apply(g, xi).coeffs, adjoint(g) * xi.coeffs), 1e-14);
  }
}

TEST(Adjoint, IsHomomorphism) {
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const auto g = oracle::random_transform(rng), h = oracle::random_transform(rng);
    EXPECT_LT(rel(adjoint(g * h), adjoint(g) * adjoint(h)), 1e-10);
  }
}

TEST(AdSmall, ZeroTwist) { EXPECT_EQ(ad_small(Twist::Zero()), Matrix6d::Zero()); }

TEST(AdSmall, SelfBracketVanishes) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const Twist xi(oracle::random_vector6(rng));
    EXPECT_LT(lie_bracket(xi, xi).coeffs.cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(AdSmall, MatchesCommutator) {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const Vector6d xi = oracle::random_vector6(rng);
    EXPECT_LT(rel(ad_small(Twist(xi)), oracle::ad_by_commutator(xi)), 1e-14);
  }
}

TEST(AdSmall, JacobiIdentity) {
  Rng rng(10);
  for (int t = 0; t < 100; ++t) {
    const Twist a(oracle::random_vector6(rng)), b(oracle::random_vector6(rng)),
        c(oracle::random_vector6(rng));
    const Twist r = lie_bracket(a, lie_bracket(b, c)) + lie_bracket(b, lie_bracket(c, a)) +
                    lie_bracket(c, lie_bracket(a, b));
    EXPECT_LT(r.coeffs.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Coadjoint, IdentityAndZero) {
  Rng rng(12);
  const Wrench F(oracle::random_vector6(rng));
  EXPECT_EQ(coadjoint_apply(RigidTransform::Identity(), F), F);
  EXPECT_EQ(coadjoint_apply(oracle::random_transform(rng), Wrench::Zero()).coeffs,
            Vector6d::Zero());
}

TEST(Coadjoint, DualToAdjoint) {
  Rng rng(13);
  for (int t = 0; t < 200; ++t) {
    const auto g = oracle::random_transform(rng);
    const Wrench F(oracle::random_vector6(rng));
    const Twist V(oracle::random_vector6(rng));
    const double lhs = pairing(coadjoint_apply(g, F), V);
    const double rhs = F.coeffs.dot(oracle::adjoint_by_conjugation(g) * V.coeffs);
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Coadjoint, AdTransposeDualToAd) {
  Rng rng(14);
  for (int t = 0; t < 200; ++t) {
    const Twist xi(oracle::random_vector6(rng));
    const Wrench F(oracle::random_vector6(rng));
    EXPECT_LT(rel(ad_small_transpose_apply(xi, F).coeffs,
                  oracle::ad_by_commutator(xi.coeffs).transpose() * F.coeffs),
              1e-14);
  }
}

TEST(SpatialInertia, MatchesParallelAxisForm) {
  Rng rng(15);
  for (int t = 0; t < 50; ++t) {
    const double m = rng.uniform(0.5, 5);
    const Vector3d c = rng.uniform_vector(-0.3, 0.3);
    const Matrix3d R = rng.rotation();
    const Matrix3d Ic = R * Vector3d(rng.uniform(0.1, 1), rng.uniform(0.1, 1),
                                     rng.uniform(0.1, 1)).asDiagonal() * R.transpose();
    const SpatialInertia J(m, c, Ic);
    EXPECT_LT(rel(J.matrix(), oracle::spatial_inertia(m, c, Ic)), 1e-14);
    EXPECT_LT(rel(J.matrix(), J.matrix().transpose()), 1e-15);
  }
}

TEST(SpatialInertia, KineticEnergyOfPointMass) {
  // A point mass at c moving with body twist (v, w) has speed |v + w x c|.
  const SpatialInertia J(3.0, Vector3d(0.2, -0.1, 0.4), Matrix3d::Zero());
  const Twist V(Vector3d(0.3, 1.0, -0.5), Vector3d(0.7, -0.2, 0.9));
  const Vector3d vel = V.linear() + V.angular().cross(J.com());
  EXPECT_NEAR(0.5 * pairing(J.apply(V), V), 0.5 * 3.0 * vel.squaredNorm(), 1e-14);
}

}  // namespace
