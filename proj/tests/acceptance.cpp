// Acceptance checks. Prints one PASS/FAIL line per criterion; exits nonzero
// if any selected criterion fails. Usage: acceptance [criterion...]

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

using namespace scandyn;
using oracle::rel;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome id_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::size_t n : {1u, 2u, 10u, 64u, 256u}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto model = random_chain(n, seed);
      const auto in = oracle::consistent_input(model, seed);
      const VectorXd ref = id_recursive(model, in).tau;
      worst = std::max(worst, relative_error(id_scan(model, in, ScanPlan::sequential()).tau, ref));
      worst = std::max(worst, relative_error(id_scan(model, in, ScanPlan::parallel(4)).tau, ref));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 60.0,
          "max_rel_err=" + fmt(worst) + " (tol 1e-8), runtime " + fmt(secs) + " s (limit 60)"};
}

Outcome semigroup_algebra() {
  Rng rng(2024);
  const auto e = VelAccOperand::identity();
  double assoc = 0, ident = 0, inverse = 0, hom = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto a = oracle::random_velacc(rng), b = oracle::random_velacc(rng),
               c = oracle::random_velacc(rng);
    assoc = std::max(assoc, oracle::operand_distance(combine_velacc(combine_velacc(a, b), c),
                                                     combine_velacc(a, combine_velacc(b, c))));
    ident = std::max({ident, oracle::operand_distance(combine_velacc(a, e), a),
                      oracle::operand_distance(combine_velacc(e, a), a)});
    inverse = std::max({inverse, oracle::operand_distance(combine_velacc(a, inverse_velacc(a)), e),
                        oracle::operand_distance(combine_velacc(inverse_velacc(a), a), e)});
  }
  for (int t = 0; t < 1000; ++t) {
    const auto a = oracle::random_velacc(rng), b = oracle::random_velacc(rng);
    hom = std::max(hom, rel(oracle::lift(combine_velacc(a, b)), oracle::lift(a) * oracle::lift(b)));
  }
  const double worst = std::max({assoc, ident, inverse, hom});
  return {worst <= 1e-10, "assoc=" + fmt(assoc) + " identity=" + fmt(ident) + " inverse=" +
                              fmt(inverse) + " lift=" + fmt(hom) + " (tol 1e-10)"};
}

Outcome fd_agreement() {
  double worst = 0.0;
  for (std::size_t n : {1u, 10u, 100u}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto model = random_chain(n, seed);
      const auto in = oracle::consistent_input(model, seed);
      const VectorXd a = fd_jsiia(model, in).qdd;
      const VectorXd b = fd_abia(model, in).qdd;
      const VectorXd c = fd_abia_merged(model, in).qdd;
      worst = std::max({worst, relative_error(a, b), relative_error(b, a), relative_error(a, c),
                        relative_error(c, a), relative_error(b, c), relative_error(c, b)});
    }
  }
  return {worst <= 1e-6, "max pairwise rel_err=" + fmt(worst) + " (tol 1e-6)"};
}

Outcome fd_round_trip() {
  double worst = 0.0;
  for (std::size_t n : {1u, 2u, 5u, 10u, 50u, 100u, 150u, 200u}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto model = random_chain(n, 300 + seed);
      const auto in = oracle::consistent_input(model, seed);
      for (auto algo : {FdAlgorithm::jsiia, FdAlgorithm::abia, FdAlgorithm::abia_merged}) {
        worst = std::max(
            worst, relative_error(forward_dynamics(model, in, algo, ScanPlan::parallel(2)).qdd,
                                  in.qdd));
      }
    }
  }
  return {worst <= 1e-6, "max rel_err=" + fmt(worst) + " over n<=200 (tol 1e-6)"};
}

Outcome pendulum() {
  const oracle::Pendulum p;
  double worst = 0.0;
  for (double q : {-2.5, -1.0, 0.0, 0.4, 1.3, 3.0}) {
    for (double qdd : {-3.0, 0.0, 2.0}) {
      const double expected = p.torque(q, qdd);
      for (auto algo : {IdAlgorithm::recursive, IdAlgorithm::scan, IdAlgorithm::scan_fused,
                        IdAlgorithm::scan_synchronous}) {
        const double got = inverse_dynamics(p.model(), p.input(q, 0.7, qdd), algo, {}).tau[0];
        worst = std::max(worst, std::abs(got - expected) / std::max(1.0, std::abs(expected)));
      }
    }
    const double expected = p.free_acceleration(q);
    for (auto algo : {FdAlgorithm::jsiia, FdAlgorithm::abia, FdAlgorithm::abia_merged}) {
      const double got = forward_dynamics(p.model(), p.input(q, 0.7, 0.0), algo, {}).qdd[0];
      worst = std::max(worst, std::abs(got - expected) / std::max(1.0, std::abs(expected)));
    }
  }
  return {worst <= 1e-10, "max rel_err=" + fmt(worst) + " (tol 1e-10)"};
}

Outcome jsi_structure() {
  double asym = 0.0, diff = 0.0;
  int failures = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const std::size_t n = 2 * (k + 1);
    const auto model = random_chain(n, 900 + k);
    const auto in = oracle::consistent_input(model, k);
    const auto M = jsi_columns(model, in.q, ScanPlan::parallel(2));
    asym = std::max(asym, rel(M, M.transpose()));
    if (Eigen::LLT<MatrixXd>(M).info() != Eigen::Success) ++failures;
    if (k % 10 == 0) diff = std::max(diff, rel(M, oracle::jsi_by_differences(model, in)));
  }
  return {asym <= 1e-8 && failures == 0 && diff <= 1e-9,
          "asymmetry=" + fmt(asym) + " (tol 1e-8), factorization failures=" +
              std::to_string(failures) + ", vs differences=" + fmt(diff) + " (tol 1e-9)"};
}

Outcome bias_quadratic() {
  Rng rng(77);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto J = random_chain(1, 5000 + static_cast<std::uint64_t>(t)).links[0].inertia;
    const Twist V(oracle::random_vector6(rng, 3.0)), Vdot(oracle::random_vector6(rng, 3.0));
    worst = std::max(worst, rel(bias_force_quadratic(J, V, Vdot).coeffs,
                                bias_force(J, V, Vdot).coeffs));
  }
  return {worst <= 1e-11, "max rel_err=" + fmt(worst) + " with 9 quadratic terms (tol 1e-11)"};
}

Outcome log_depth() {
  std::size_t worst_n = 0;
  long worst_slack = -1000000;
  const auto add = make_semigroup<long>([](long a, long b) { return a + b; });
  for (std::size_t n = 1; n <= 4096; ++n) {
    std::vector<long> items(n, 1);
    ScanStats stats;
    const auto out = inclusive_scan(std::move(items), add, ScanPlan::parallel(4), &stats);
    if (out.back() != static_cast<long>(n)) return {false, "wrong scan result at n=" + std::to_string(n)};
    const long bound = n <= 1 ? 0 : 2 * static_cast<long>(std::ceil(std::log2(static_cast<double>(n))));
    const long slack = static_cast<long>(stats.stages) - bound;
    if (slack > worst_slack) {
      worst_slack = slack;
      worst_n = n;
    }
  }
  return {worst_slack <= 0, "max(stages - 2*ceil(log2 n))=" + std::to_string(worst_slack) +
                                " at n=" + std::to_string(worst_n) + " (must be <= 0)"};
}

Outcome batch_scaling() {
  const auto model = random_chain(10, 1);
  std::vector<DynamicsInput> inputs;
  for (std::uint64_t s = 0; s < 1000; ++s) inputs.push_back(oracle::consistent_input(model, s));
  auto time_batch = [&](std::size_t workers) {
    std::vector<double> samples;
    for (int rep = 0; rep < 12; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto out = id_batch(model, inputs, IdAlgorithm::scan, ScanPlan::parallel(workers));
      const double s = seconds_since(t0);
      if (!out.back().ok()) return -1.0;
      if (rep >= 2) samples.push_back(s);
    }
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
  };
  const double t1 = time_batch(1), t4 = time_batch(4);
  const double speedup = t1 / t4;
  return {t1 > 0 && t4 > 0 && speedup >= 2.0,
          "speedup=" + fmt(speedup) + " (need >= 2.0; median 1-worker " + fmt(t1 * 1e3) +
              " ms, 4-worker " + fmt(t4 * 1e3) + " ms, hardware_concurrency=" +
              std::to_string(std::thread::hardware_concurrency()) + ")"};
}

// Bytes of every number produced for one (seed, workers) configuration.
std::string fingerprint(std::uint64_t seed, std::size_t workers) {
  std::string bytes;
  auto put = [&](const VectorXd& v) {
    bytes.append(reinterpret_cast<const char*>(v.data()), sizeof(double) * v.size());
  };
  const ScanPlan plan = ScanPlan::parallel(workers);
  for (std::size_t n : {1u, 7u, 64u, 300u}) {
    const auto model = random_chain(n, seed);
    const auto in = oracle::consistent_input(model, seed);
    for (auto algo : {IdAlgorithm::recursive, IdAlgorithm::scan, IdAlgorithm::scan_fused,
                      IdAlgorithm::scan_synchronous}) {
      put(inverse_dynamics(model, in, algo, plan).tau);
    }
    for (auto algo : {FdAlgorithm::jsiia, FdAlgorithm::abia, FdAlgorithm::abia_merged}) {
      put(forward_dynamics(model, in, algo, plan).qdd);
    }
  }
  const auto model = random_chain(10, seed);
  std::vector<DynamicsInput> inputs;
  for (std::uint64_t s = 0; s < 100; ++s) inputs.push_back(oracle::consistent_input(model, seed + s));
  for (const auto& r : id_batch(model, inputs, IdAlgorithm::scan, plan)) put(r.value->tau);
  for (const auto& r : fd_batch(model, inputs, FdAlgorithm::abia, plan)) put(r.value->qdd);
  return bytes;
}

Outcome determinism() {
  const std::string reference = fingerprint(17, 1);
  int mismatches = 0;
  for (std::size_t w : {1u, 2u, 8u}) {
    for (int run = 0; run < 2; ++run) {
      if (fingerprint(17, w) != reference) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) +
                               " mismatching runs out of 6 (workers 1, 2, 8; " +
                               std::to_string(reference.size()) + " bytes compared)"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "scan/recursive ID equivalence", id_equivalence},
      {2, "semigroup algebra and 13x13 lift", semigroup_algebra},
      {3, "FD cross-algorithm agreement", fd_agreement},
      {4, "FD(ID) round trip", fd_round_trip},
      {5, "analytic pendulum", pendulum},
      {6, "JSI symmetry, SPD and linearity", jsi_structure},
      {7, "bias-force quadratic form", bias_quadratic},
      {8, "log-depth scan structure", log_depth},
      {9, "batch scaling with 4 workers", batch_scaling},
      {10, "determinism across worker counts", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
