#pragma once

// Benchmark and verification harness: link-count and group-count scaling
// experiments written as CSV, plus the cross-algorithm equivalence matrix.

#include "scandyn/forward_dynamics.hpp"
#include "scandyn/version.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace scandyn::bench {

enum class Mode { id, fd };

inline const std::vector<std::string>& id_algorithms() {
  static const std::vector<std::string> names{"recursive", "scan", "scan_fused",
                                              "scan_synchronous"};
  return names;
}
inline const std::vector<std::string>& fd_algorithms() {
  static const std::vector<std::string> names{"jsiia", "abia", "abia_merged"};
  return names;
}

inline IdAlgorithm parse_id_algorithm(const std::string& s) {
  if (s == "recursive") return IdAlgorithm::recursive;
  if (s == "scan") return IdAlgorithm::scan;
  if (s == "scan_fused") return IdAlgorithm::scan_fused;
  if (s == "scan_synchronous") return IdAlgorithm::scan_synchronous;
  throw std::invalid_argument("unknown inverse dynamics algorithm '" + s + "'");
}

inline FdAlgorithm parse_fd_algorithm(const std::string& s) {
  if (s == "jsiia") return FdAlgorithm::jsiia;
  if (s == "abia") return FdAlgorithm::abia;
  if (s == "abia_merged") return FdAlgorithm::abia_merged;
  throw std::invalid_argument("unknown forward dynamics algorithm '" + s + "'");
}

struct BenchConfig {
  Mode mode = Mode::id;
  std::vector<std::string> algos;
  std::vector<std::size_t> links;
  std::vector<std::size_t> groups;
  std::size_t repeats = 1000;
  std::size_t warmup = 10;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool verify = false;

  /// Throws std::invalid_argument describing the first violated constraint.
  void check() const {
    if (repeats < 1) throw std::invalid_argument("--repeats must be >= 1");
    if (workers < 1) throw std::invalid_argument("--workers must be >= 1");
    for (auto n : links) {
      if (n < 1) throw std::invalid_argument("link counts must be >= 1");
    }
    for (auto g : groups) {
      if (g < 1) throw std::invalid_argument("group counts must be >= 1");
    }
    if (algos.empty()) throw std::invalid_argument("no algorithms selected");
    for (const auto& a : algos) {
      if (mode == Mode::id) {
        parse_id_algorithm(a);
      } else {
        parse_fd_algorithm(a);
      }
    }
  }
};

struct BenchRecord {
  std::string mode;
  std::string algo;
  std::size_t links = 0;
  std::size_t groups = 0;
  std::size_t repeats = 0;
  double mean_ns = 0.0;
  double std_ns = 0.0;
  double max_rel_err = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::size_t> scan_depth;
};

inline constexpr const char* kCsvHeader =
    "mode,algo,links,groups,repeats,mean_ns,std_ns,max_rel_err,scan_depth";

inline void write_row(std::ostream& os, const BenchRecord& r) {
  std::ostringstream line;
  line << r.mode << ',' << r.algo << ',' << r.links << ',' << r.groups << ','
       << r.repeats << ',' << std::fixed << std::setprecision(1) << r.mean_ns
       << ',' << r.std_ns << ',';
  line << std::defaultfloat << std::setprecision(6);
  if (std::isnan(r.max_rel_err)) {
    line << "nan";
  } else {
    line << r.max_rel_err;
  }
  line << ',';
  if (r.scan_depth) line << *r.scan_depth;
  os << line.str() << '\n';
}

/// Provenance comment block that starts every CSV file.
inline void write_provenance(std::ostream& os, const std::string& command,
                             const BenchConfig& cfg) {
  os << "# scandyn " << kVersion << '\n'
     << "# command: " << command << '\n'
     << "# seed: " << cfg.seed << '\n'
     << "# workers: " << cfg.workers
     << " (hardware_concurrency: " << std::thread::hardware_concurrency() << ")\n"
     << "# prng: " << Rng::kName << '\n'
     << "# model ranges: " << RandomChainRanges{}.describe() << '\n'
     << "# input ranges: q in [-pi, pi], qd and qdd in [-1, 1], base velocity "
        "in [-0.5, 0.5], base acceleration gravity (0, 0, -9.81) plus "
        "[-0.5, 0.5], tip wrench in [-1, 1], torques from ID of the random qdd\n"
     << "# timing: steady_clock around evaluation only, " << cfg.warmup
     << " warm-up evaluations discarded; std_ns is the sample standard "
        "deviation (extension)\n"
     << kCsvHeader << '\n';
}

/// Sum of scan stages over the pipeline's scans; empty for the recursion.
inline std::optional<std::size_t> pipeline_scan_depth(Mode mode,
                                                      const std::string& algo,
                                                      std::size_t n,
                                                      const ScanPlan& plan) {
  auto d = [&](std::size_t len) { return depth_counter(len, plan); };
  const std::size_t split_id = 2 * d(n) + d(n + 1);
  if (mode == Mode::id) {
    switch (parse_id_algorithm(algo)) {
      case IdAlgorithm::recursive: return std::nullopt;
      case IdAlgorithm::scan: return split_id;
      case IdAlgorithm::scan_fused:
      case IdAlgorithm::scan_synchronous: return d(n) + d(n + 1);
    }
  }
  switch (parse_fd_algorithm(algo)) {
    case FdAlgorithm::jsiia: return split_id;
    case FdAlgorithm::abia: return split_id + d(n + 1) + d(n);
    case FdAlgorithm::abia_merged: return d(n) + d(n + 1) + d(n);
  }
  return std::nullopt;
}

namespace detail {

struct Timing {
  double mean = 0.0;
  double std = 0.0;
};

inline Timing summarize(const std::vector<double>& samples) {
  Timing t;
  if (samples.empty()) return t;
  double sum = 0.0;
  for (double s : samples) sum += s;
  t.mean = sum / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - t.mean) * (s - t.mean);
    t.std = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  }
  return t;
}

template <typename F>
double time_ns(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::nano>(stop - start).count();
}

/// Random input whose applied torques are ID(q, qd, qdd) so that FD should
/// recover qdd.
inline DynamicsInput consistent_input(const ChainModel& model, Rng& rng) {
  DynamicsInput in = random_input(model.size(), rng);
  in.applied_torques = id_recursive(model, in).tau;
  return in;
}

inline const char* mode_name(Mode m) { return m == Mode::id ? "id" : "fd"; }

}  // namespace detail

/// One record per (link count, algorithm). Each repeat draws a new random
/// input; only the evaluation itself is timed.
inline std::vector<BenchRecord> run_links_experiment(const BenchConfig& cfg) {
  cfg.check();
  if (cfg.links.empty()) throw std::invalid_argument("--links is required");
  std::vector<BenchRecord> out;
  const ScanPlan plan = ScanPlan::parallel(cfg.workers);

  for (std::size_t n : cfg.links) {
    const ChainModel model = random_chain(n, cfg.seed);
    for (const auto& algo : cfg.algos) {
      Rng rng = Rng(cfg.seed).split(n);
      std::vector<double> samples;
      samples.reserve(cfg.repeats);
      double max_err = cfg.verify ? 0.0 : std::numeric_limits<double>::quiet_NaN();

      for (std::size_t rep = 0; rep < cfg.warmup + cfg.repeats; ++rep) {
        const DynamicsInput in = detail::consistent_input(model, rng);
        VectorXd got;
        const double ns = detail::time_ns([&] {
          if (cfg.mode == Mode::id) {
            got = inverse_dynamics(model, in, parse_id_algorithm(algo), plan).tau;
          } else {
            got = forward_dynamics(model, in, parse_fd_algorithm(algo), plan).qdd;
          }
        });
        if (rep < cfg.warmup) continue;
        samples.push_back(ns);
        if (cfg.verify) {
          const VectorXd expected = cfg.mode == Mode::id
              ? id_recursive(model, in).tau
              : (parse_fd_algorithm(algo) == FdAlgorithm::jsiia
                     ? in.qdd
                     : fd_jsiia(model, in).qdd);
          max_err = std::max(max_err, relative_error(got, expected));
        }
      }

      const auto t = detail::summarize(samples);
      out.push_back({detail::mode_name(cfg.mode), algo, n, 1, cfg.repeats, t.mean,
                     t.std, max_err, pipeline_scan_depth(cfg.mode, algo, n, plan)});
    }
  }
  return out;
}

/// Worker counts compared by the group experiment: 1 and cfg.workers.
inline std::vector<std::size_t> plan_variants(const BenchConfig& cfg) {
  if (cfg.workers == 1) return {1};
  return {1, cfg.workers};
}

/// One record per (group count, algorithm, worker count). The algo column
/// carries the worker count as "<algo>@w<workers>".
inline std::vector<BenchRecord> run_groups_experiment(const BenchConfig& cfg,
                                                      std::size_t chain_links = 10) {
  cfg.check();
  if (cfg.groups.empty()) throw std::invalid_argument("--groups is required");
  const ChainModel model = random_chain(chain_links, cfg.seed);
  std::vector<BenchRecord> out;

  for (std::size_t g : cfg.groups) {
    for (const auto& algo : cfg.algos) {
      for (std::size_t workers : plan_variants(cfg)) {
        const ScanPlan plan = ScanPlan::parallel(workers);
        Rng rng = Rng(cfg.seed).split(g);
        std::vector<double> samples;
        double max_err = cfg.verify ? 0.0 : std::numeric_limits<double>::quiet_NaN();

        for (std::size_t rep = 0; rep < cfg.warmup + cfg.repeats; ++rep) {
          std::vector<DynamicsInput> inputs;
          inputs.reserve(g);
          for (std::size_t k = 0; k < g; ++k) {
            inputs.push_back(detail::consistent_input(model, rng));
          }
          std::vector<VectorXd> got(g);
          const double ns = detail::time_ns([&] {
            if (cfg.mode == Mode::id) {
              auto res = id_batch(model, inputs, parse_id_algorithm(algo), plan);
              for (std::size_t k = 0; k < g; ++k) {
                if (res[k].ok()) got[k] = std::move(res[k].value->tau);
              }
            } else {
              auto res = fd_batch(model, inputs, parse_fd_algorithm(algo), plan);
              for (std::size_t k = 0; k < g; ++k) {
                if (res[k].ok()) got[k] = std::move(res[k].value->qdd);
              }
            }
          });
          if (rep < cfg.warmup) continue;
          samples.push_back(ns);
          if (cfg.verify) {
            for (std::size_t k = 0; k < g; ++k) {
              const VectorXd expected = cfg.mode == Mode::id
                  ? id_recursive(model, inputs[k]).tau
                  : inputs[k].qdd;
              max_err = std::max(max_err, relative_error(got[k], expected));
            }
          }
        }

        const auto t = detail::summarize(samples);
        out.push_back({detail::mode_name(cfg.mode),
                       algo + "@w" + std::to_string(workers), chain_links, g,
                       cfg.repeats, t.mean, t.std, max_err,
                       pipeline_scan_depth(cfg.mode, algo, chain_links, plan)});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Equivalence matrix

enum class Fault { none, velocity_operand };

struct VerifyCell {
  std::string name;
  std::size_t links = 0;
  double tolerance = 0.0;
  double max_err = 0.0;
  std::uint64_t worst_seed = 0;

  bool pass() const { return max_err <= tolerance; }
};

struct VerifyReport {
  std::vector<VerifyCell> cells;

  bool ok() const {
    for (const auto& c : cells) {
      if (!c.pass()) return false;
    }
    return true;
  }
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::vector<std::size_t> sizes{1, 2, 10, 64, 200};
  std::size_t trials = 10;
  std::size_t workers = 4;
  Fault fault = Fault::none;
};

/// Cross-checks every algorithm against its oracle on `trials` random
/// (model, input) pairs per size. Seeds are seed + trial.
inline VerifyReport verify_suite(const VerifyOptions& opt) {
  struct Check {
    std::string name;
    double tolerance;
  };
  const std::vector<Check> checks{
      {"id_scan/sequential vs id_recursive", 1e-8},
      {"id_scan/parallel vs id_recursive", 1e-8},
      {"id_scan_fused vs id_scan", 1e-9},
      {"id_scan_synchronous vs id_scan", 1e-9},
      {"fd_abia vs fd_jsiia", 1e-6},
      {"fd_abia_merged vs fd_jsiia", 1e-6},
      {"fd_abia_merged vs fd_abia", 1e-6},
      {"fd_jsiia(id) round trip", 1e-6},
      {"fd_abia(id) round trip", 1e-6},
      {"fd_abia_merged(id) round trip", 1e-6},
  };

  IdScanHooks hooks;
  if (opt.fault == Fault::velocity_operand) {
    hooks.velocity_operands = [](std::vector<TransformTwistOperand>& ops) {
      ops.back().xi.coeffs[0] += 1.0;
    };
  }

  VerifyReport report;
  for (std::size_t n : opt.sizes) {
    std::vector<VerifyCell> cells;
    for (const auto& c : checks) cells.push_back({c.name, n, c.tolerance, 0.0, 0});
    auto record = [&](std::size_t idx, double err, std::uint64_t seed) {
      if (err > cells[idx].max_err || std::isnan(err)) {
        cells[idx].max_err = std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
        cells[idx].worst_seed = seed;
      }
    };

    for (std::size_t t = 0; t < opt.trials; ++t) {
      const std::uint64_t seed = opt.seed + t;
      const ChainModel model = random_chain(n, seed);
      Rng rng = Rng(seed).split(n);
      const DynamicsInput in = detail::consistent_input(model, rng);
      const ScanPlan par = ScanPlan::parallel(opt.workers);

      const auto ref = id_recursive(model, in);
      const auto split_seq = id_scan(model, in, ScanPlan::sequential(), &hooks);
      const auto split_par = id_scan(model, in, par, &hooks);
      record(0, relative_error(split_seq.tau, ref.tau), seed);
      record(1, relative_error(split_par.tau, ref.tau), seed);
      record(2, relative_error(id_scan_fused(model, in, par).tau, split_par.tau), seed);
      record(3, relative_error(
                    id_scan_fused(model, in, par, FusedForm::synchronous).tau,
                    split_par.tau),
             seed);

      const VectorXd jsiia = fd_jsiia(model, in, par).qdd;
      const VectorXd abia = fd_abia(model, in, par).qdd;
      const VectorXd merged = fd_abia_merged(model, in, par).qdd;
      record(4, relative_error(abia, jsiia), seed);
      record(5, relative_error(merged, jsiia), seed);
      record(6, relative_error(merged, abia), seed);
      record(7, relative_error(jsiia, in.qdd), seed);
      record(8, relative_error(abia, in.qdd), seed);
      record(9, relative_error(merged, in.qdd), seed);
    }
    for (auto& c : cells) report.cells.push_back(std::move(c));
  }
  return report;
}

inline void print_report(std::ostream& os, const VerifyReport& report) {
  for (const auto& c : report.cells) {
    os << (c.pass() ? "PASS " : "FAIL ") << std::left << std::setw(36) << c.name
       << " n=" << std::setw(4) << c.links << " max_rel_err=" << std::scientific
       << std::setprecision(3) << c.max_err << " tol=" << c.tolerance
       << std::defaultfloat;
    if (!c.pass()) os << " worst_seed=" << c.worst_seed;
    os << '\n';
  }
}

}  // namespace scandyn::bench
