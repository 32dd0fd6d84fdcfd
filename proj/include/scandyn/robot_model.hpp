#pragma once

// Serial open-chain robot models, their dynamic inputs, random generation and
// the JSON model file format.

#include "scandyn/se3.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace scandyn {

using VectorXd = Eigen::VectorXd;

/// One link: joint i connects link i-1 to link i with
/// f_{i-1,i}(q) = home * exp(joint_twist * q).
struct LinkSpec {
  RigidTransform home;
  Twist joint_twist;
  SpatialInertia inertia;

  bool operator==(const LinkSpec&) const = default;
};

struct ChainModel {
  std::vector<LinkSpec> links;

  std::size_t size() const { return links.size(); }
  bool operator==(const ChainModel&) const = default;
};

/// Joint state and boundary conditions for one dynamics evaluation.
///
/// Gravity enters through base_acceleration (see gravity_base_acceleration).
/// The tip wrench is expressed in the frame of the last link.
struct DynamicsInput {
  VectorXd q;
  VectorXd qd;
  VectorXd qdd;
  Twist base_velocity;
  Twist base_acceleration;
  Wrench tip_force;
  VectorXd applied_torques;  // forward dynamics only

  static DynamicsInput zeros(std::size_t n) {
    DynamicsInput in;
    in.q = VectorXd::Zero(n);
    in.qd = VectorXd::Zero(n);
    in.qdd = VectorXd::Zero(n);
    in.applied_torques = VectorXd::Zero(n);
    return in;
  }
};

/// Fictitious base acceleration that reproduces a uniform gravity field.
inline Twist gravity_base_acceleration(const Vector3d& gravity) {
  return {-gravity, Vector3d::Zero()};
}

inline const Vector3d kStandardGravity{0.0, 0.0, -9.81};

/// Throws std::invalid_argument unless q, qd, qdd (and applied_torques when
/// required) all have the model's length.
inline void check_input_sizes(const ChainModel& model, const DynamicsInput& in,
                              bool need_torques) {
  const auto n = static_cast<Eigen::Index>(model.size());
  if (n == 0) throw std::invalid_argument("model has no links");
  auto check = [n](const VectorXd& v, const char* name) {
    if (v.size() != n) {
      throw std::invalid_argument(std::string("input size mismatch: ") + name +
                                  " has " + std::to_string(v.size()) +
                                  " entries, model has " + std::to_string(n) +
                                  " links");
    }
  };
  check(in.q, "q");
  check(in.qd, "qd");
  check(in.qdd, "qdd");
  if (need_torques) check(in.applied_torques, "applied_torques");
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::size_t link;
  std::string message;
};

inline constexpr double kRotationTolerance = 1e-10;
inline constexpr double kTwistNormTolerance = 1e-10;
inline constexpr double kSymmetryTolerance = 1e-12;

/// Checks every model invariant and reports all violations.
inline std::vector<Violation> validate(const ChainModel& model) {
  std::vector<Violation> out;
  if (model.links.empty()) {
    out.push_back({0, "model has no links"});
    return out;
  }
  for (std::size_t i = 0; i < model.size(); ++i) {
    const LinkSpec& l = model.links[i];
    auto fail = [&](std::string msg) {
      out.push_back({i, "link " + std::to_string(i) + ": " + std::move(msg)});
    };

    if (!l.home.rotation.allFinite() || !l.home.translation.allFinite()) {
      fail("home transform has non-finite entries");
    } else if (orthonormality_error(l.home.rotation) > kRotationTolerance) {
      fail("home rotation is not orthonormal with determinant +1");
    }

    const double wn = l.joint_twist.angular().norm();
    const double vn = l.joint_twist.linear().norm();
    const bool revolute = std::abs(wn - 1.0) <= kTwistNormTolerance;
    const bool prismatic = wn <= kTwistNormTolerance &&
                           std::abs(vn - 1.0) <= kTwistNormTolerance;
    if (!l.joint_twist.coeffs.allFinite() || !(revolute || prismatic)) {
      fail("joint twist is not normalized (angular norm " + std::to_string(wn) +
           ", linear norm " + std::to_string(vn) + ")");
    }

    const Matrix6d& J = l.inertia.matrix();
    if (!J.allFinite()) {
      fail("inertia has non-finite entries");
      continue;
    }
    if ((J - J.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
      fail("inertia is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix6d> eig(J);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (!(min_eig > 0.0)) {
      fail("inertia is not positive definite (smallest eigenvalue " +
           std::to_string(min_eig) + ")");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random generation

/// Portable generator: std::mt19937_64 (output sequence fixed by the standard)
/// seeded through SplitMix64, with hand-rolled uniform mapping because the
/// standard distributions are implementation defined.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64/splitmix64";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(mix(seed, stream)), engine_(seed_) {}

  /// Independent generator for sub-stream `stream` (e.g. one per group).
  Rng split(std::uint64_t stream) const { return Rng(seed_, stream + 1); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool coin() { return (engine_() >> 63) != 0; }

  Vector3d uniform_vector(double lo, double hi) {
    const double x = uniform(lo, hi), y = uniform(lo, hi), z = uniform(lo, hi);
    return {x, y, z};
  }

  Vector3d unit_vector() {
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, 2.0 * std::numbers::pi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
  }

  /// Uniformly distributed rotation (Shoemake's subgroup algorithm).
  Matrix3d rotation() {
    const double u1 = uniform(), u2 = uniform(), u3 = uniform();
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const double t2 = 2.0 * std::numbers::pi * u2;
    const double t3 = 2.0 * std::numbers::pi * u3;
    Eigen::Quaterniond quat(b * std::cos(t3), a * std::sin(t2),
                            a * std::cos(t2), b * std::sin(t3));
    return quat.normalized().toRotationMatrix();
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (stream * 0xD1B54A32D192ED03ULL);
    splitmix64(s);
    return splitmix64(s);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Ranges used by random_chain; echoed into benchmark provenance headers.
struct RandomChainRanges {
  double min_offset = 0.1, max_offset = 1.0;  // |home translation|, m
  double min_mass = 0.5, max_mass = 5.0;      // kg
  double max_com = 0.2;                       // |com component|, m
  double min_box = 0.05, max_box = 0.5;       // inertia box edge, m

  std::string describe() const {
    return "home translation norm [" + std::to_string(min_offset) + ", " +
           std::to_string(max_offset) + "] m; mass [" +
           std::to_string(min_mass) + ", " + std::to_string(max_mass) +
           "] kg; com components [-" + std::to_string(max_com) + ", " +
           std::to_string(max_com) + "] m; inertia of box with edges [" +
           std::to_string(min_box) + ", " + std::to_string(max_box) +
           "] m in a random orientation; joints revolute/prismatic 50/50 "
           "with uniform random axes; home rotation uniform on SO(3)";
  }
};

inline ChainModel random_chain(std::size_t n, std::uint64_t seed,
                               const RandomChainRanges& r = {}) {
  if (n == 0) throw std::invalid_argument("random_chain: link count must be >= 1");
  Rng rng(seed);
  ChainModel model;
  model.links.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LinkSpec link;
    link.home.rotation = rng.rotation();
    const Vector3d direction = rng.unit_vector();
    link.home.translation = direction * rng.uniform(r.min_offset, r.max_offset);

    const Vector3d axis = rng.unit_vector();
    link.joint_twist = rng.coin() ? Twist(Vector3d::Zero(), axis)
                                  : Twist(axis, Vector3d::Zero());

    const double mass = rng.uniform(r.min_mass, r.max_mass);
    const Vector3d com = rng.uniform_vector(-r.max_com, r.max_com);
    const Vector3d e = rng.uniform_vector(r.min_box, r.max_box);
    const Vector3d e2 = e.cwiseProduct(e);
    const Vector3d principal = mass / 12.0 *
        Vector3d(e2.y() + e2.z(), e2.x() + e2.z(), e2.x() + e2.y());
    const Matrix3d rot = rng.rotation();
    Matrix3d inertia = rot * principal.asDiagonal() * rot.transpose();
    inertia = 0.5 * (inertia + inertia.transpose());
    link.inertia = SpatialInertia(mass, com, inertia);
    model.links.push_back(link);
  }
  return model;
}

/// Ranges used by random_input.
struct RandomInputRanges {
  double q = std::numbers::pi;  // q in [-q, q]
  double qd = 1.0;
  double qdd = 1.0;
  double base_velocity = 0.5;
  double base_acceleration = 0.5;  // added on top of gravity
  double tip_force = 1.0;
  double torque = 5.0;
};

/// Random joint state and boundary conditions, gravity included.
inline DynamicsInput random_input(std::size_t n, Rng& rng,
                                  const RandomInputRanges& r = {}) {
  DynamicsInput in = DynamicsInput::zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    in.q[k] = rng.uniform(-r.q, r.q);
    in.qd[k] = rng.uniform(-r.qd, r.qd);
    in.qdd[k] = rng.uniform(-r.qdd, r.qdd);
    in.applied_torques[k] = rng.uniform(-r.torque, r.torque);
  }
  Vector6d bv, ba, tf;
  for (int k = 0; k < 6; ++k) bv[k] = rng.uniform(-r.base_velocity, r.base_velocity);
  for (int k = 0; k < 6; ++k) ba[k] = rng.uniform(-r.base_acceleration, r.base_acceleration);
  for (int k = 0; k < 6; ++k) tf[k] = rng.uniform(-r.tip_force, r.tip_force);
  in.base_velocity = Twist(bv);
  in.base_acceleration = gravity_base_acceleration(kStandardGravity) + Twist(ba);
  in.tip_force = Wrench(tf);
  return in;
}

// ---------------------------------------------------------------------------
// Model file (JSON, version 1)

class ModelError : public std::runtime_error {
 public:
  ModelError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

namespace detail {

inline void require_finite(double x, const std::string& path) {
  if (!std::isfinite(x)) throw ModelError(path, "non-finite number");
}

inline double read_scalar(const nlohmann::json& obj, const std::string& key,
                          const std::string& parent) {
  const std::string path = parent + "." + key;
  if (!obj.contains(key)) throw ModelError(path, "missing field");
  const auto& node = obj.at(key);
  if (!node.is_number()) throw ModelError(path, "expected a number");
  const double x = node.get<double>();
  require_finite(x, path);
  return x;
}

inline std::vector<double> read_numbers(const nlohmann::json& obj,
                                        const std::string& key,
                                        std::size_t count,
                                        const std::string& parent) {
  const std::string path = parent + "." + key;
  if (!obj.contains(key)) throw ModelError(path, "missing field");
  const auto& node = obj.at(key);
  if (!node.is_array() || node.size() != count) {
    throw ModelError(path, "expected an array of " + std::to_string(count) +
                               " numbers");
  }
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::string item = path + "[" + std::to_string(k) + "]";
    if (!node[k].is_number()) throw ModelError(item, "expected a number");
    const double x = node[k].get<double>();
    require_finite(x, item);
    out.push_back(x);
  }
  return out;
}

inline nlohmann::json numbers(const double* data, std::size_t count,
                              const std::string& path) {
  auto arr = nlohmann::json::array();
  for (std::size_t k = 0; k < count; ++k) {
    require_finite(data[k], path);
    arr.push_back(data[k]);
  }
  return arr;
}

inline nlohmann::json row_major(const Matrix3d& m, const std::string& path) {
  const Eigen::Matrix<double, 3, 3, Eigen::RowMajor> r = m;
  return numbers(r.data(), 9, path);
}

inline Matrix3d matrix_from_row_major(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(v.data());
}

}  // namespace detail

inline constexpr int kModelFileVersion = 1;

/// Serializes to the version-1 model document. Doubles are written in their
/// shortest round-trip decimal form, so load_model(save_model(m)) == m.
inline std::string save_model(const ChainModel& model) {
  nlohmann::json doc;
  doc["version"] = kModelFileVersion;
  doc["links"] = nlohmann::json::array();
  for (std::size_t i = 0; i < model.size(); ++i) {
    const LinkSpec& l = model.links[i];
    const std::string p = "links[" + std::to_string(i) + "]";
    nlohmann::json j;
    j["home_rotation"] = detail::row_major(l.home.rotation, p + ".home_rotation");
    j["home_translation"] =
        detail::numbers(l.home.translation.data(), 3, p + ".home_translation");
    j["joint_twist"] =
        detail::numbers(l.joint_twist.coeffs.data(), 6, p + ".joint_twist");
    detail::require_finite(l.inertia.mass(), p + ".mass");
    j["mass"] = l.inertia.mass();
    j["com"] = detail::numbers(l.inertia.com().data(), 3, p + ".com");
    j["rot_inertia"] = detail::row_major(l.inertia.rot_inertia(), p + ".rot_inertia");
    doc["links"].push_back(std::move(j));
  }
  return doc.dump(2);
}

/// Parses a version-1 model document. Throws ModelError naming the offending
/// field path. Does not run validate().
inline ChainModel load_model(const std::string& document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError("$", std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ModelError("$", "expected an object");
  if (!doc.contains("version") || !doc["version"].is_number_integer()) {
    throw ModelError("version", "missing or non-integer field");
  }
  if (doc["version"].get<int>() != kModelFileVersion) {
    throw ModelError("version", "unsupported version " + doc["version"].dump());
  }
  if (!doc.contains("links") || !doc["links"].is_array()) {
    throw ModelError("links", "missing or not an array");
  }
  const auto& links = doc["links"];
  if (links.empty()) throw ModelError("links", "empty links array");

  ChainModel model;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string p = "links[" + std::to_string(i) + "]";
    const auto& j = links[i];
    if (!j.is_object()) throw ModelError(p, "expected an object");
    LinkSpec l;
    l.home.rotation =
        detail::matrix_from_row_major(detail::read_numbers(j, "home_rotation", 9, p));
    const auto t = detail::read_numbers(j, "home_translation", 3, p);
    l.home.translation = Vector3d(t[0], t[1], t[2]);
    const auto s = detail::read_numbers(j, "joint_twist", 6, p);
    l.joint_twist = Twist(Eigen::Map<const Vector6d>(s.data()));
    const double mass = detail::read_scalar(j, "mass", p);
    const auto c = detail::read_numbers(j, "com", 3, p);
    const Matrix3d inertia =
        detail::matrix_from_row_major(detail::read_numbers(j, "rot_inertia", 9, p));
    l.inertia = SpatialInertia(mass, Vector3d(c[0], c[1], c[2]), inertia);
    model.links.push_back(l);
  }
  return model;
}


// ---------------------------------------------------------------------------
// Dynamics input file (JSON)
//
// Fields: q, qd, qdd, applied_torques (n numbers each), base_velocity,
// base_acceleration, tip_force (6 numbers each). q is required; the rest
// default to zero.

inline DynamicsInput load_input(const std::string& document, std::size_t n) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError("$", std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ModelError("$", "expected an object");
  DynamicsInput in = DynamicsInput::zeros(n);
  auto vec = [&](const char* key, VectorXd& out, bool required) {
    if (!doc.contains(key)) {
      if (required) throw ModelError(key, "missing field");
      return;
    }
    const auto v = detail::read_numbers(doc, key, n, "$");
    out = Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(n));
  };
  auto six = [&](const char* key, Vector6d& out) {
    if (!doc.contains(key)) return;
    const auto v = detail::read_numbers(doc, key, 6, "$");
    out = Eigen::Map<const Vector6d>(v.data());
  };
  vec("q", in.q, true);
  vec("qd", in.qd, false);
  vec("qdd", in.qdd, false);
  vec("applied_torques", in.applied_torques, false);
  six("base_velocity", in.base_velocity.coeffs);
  six("base_acceleration", in.base_acceleration.coeffs);
  six("tip_force", in.tip_force.coeffs);
  return in;
}

inline std::string save_input(const DynamicsInput& in) {
  auto arr = [](const auto& v) {
    return detail::numbers(v.data(), static_cast<std::size_t>(v.size()), "$");
  };
  nlohmann::json doc;
  doc["q"] = arr(in.q);
  doc["qd"] = arr(in.qd);
  doc["qdd"] = arr(in.qdd);
  doc["applied_torques"] = arr(in.applied_torques);
  doc["base_velocity"] = arr(in.base_velocity.coeffs);
  doc["base_acceleration"] = arr(in.base_acceleration.coeffs);
  doc["tip_force"] = arr(in.tip_force.coeffs);
  return doc.dump(2);
}

}  // namespace scandyn
