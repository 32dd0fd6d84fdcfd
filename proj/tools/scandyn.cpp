// scandyn: benchmark, verification and one-shot evaluation CLI.

#include "scandyn/bench.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace scandyn;
using namespace scandyn::bench;

struct Options {
  std::string mode = "id";
  std::vector<std::string> algos;
  std::vector<std::size_t> links;
  std::vector<std::size_t> groups;
  std::size_t repeats = 1000;
  std::size_t warmup = 10;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool verify = false;
  std::string output;
  std::string model_path;
  std::string input_path;
  std::size_t trials = 10;
  std::string fault = "none";
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--mode", o.mode, "id or fd")
      ->check(CLI::IsMember({"id", "fd"}))
      ->capture_default_str();
  cmd->add_option("--algo", o.algos,
                  "algorithms (id: recursive, scan, scan_fused, scan_synchronous; "
                  "fd: jsiia, abia, abia_merged); default all for the mode")
      ->delimiter(',');
  cmd->add_option("--repeats", o.repeats, "timed evaluations per row")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--warmup", o.warmup, "discarded warm-up evaluations")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "model and input seed")->capture_default_str();
  cmd->add_option("--workers", o.workers, "worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--verify", o.verify, "cross-check every evaluation against an oracle");
  cmd->add_option("--output", o.output, "CSV path (default stdout)");
}

BenchConfig to_config(const Options& o) {
  BenchConfig cfg;
  cfg.mode = o.mode == "fd" ? Mode::fd : Mode::id;
  cfg.algos = o.algos;
  if (cfg.algos.empty()) cfg.algos = cfg.mode == Mode::id ? id_algorithms() : fd_algorithms();
  cfg.links = o.links;
  cfg.groups = o.groups;
  cfg.repeats = o.repeats;
  cfg.warmup = o.warmup;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  cfg.verify = o.verify;
  return cfg;
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

int write_csv(const Options& o, const BenchConfig& cfg, const std::string& command,
              const std::vector<BenchRecord>& rows) {
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!o.output.empty()) {
    file.open(o.output);
    if (!file) {
      std::cerr << "error: cannot open " << o.output << " for writing\n";
      return 1;
    }
    os = &file;
  }
  write_provenance(*os, command, cfg);
  for (const auto& r : rows) write_row(*os, r);
  os->flush();
  if (!*os) {
    std::cerr << "error: write failed\n";
    return 1;
  }
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void print_vector(const VectorXd& v) {
  std::cout << std::setprecision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::cout << (i ? " " : "") << v[i];
  }
  std::cout << '\n';
}

int evaluate(const Options& o, bool forward) {
  const ChainModel model = load_model(read_file(o.model_path));
  const DynamicsInput in = load_input(read_file(o.input_path), model.size());
  const ScanPlan plan = ScanPlan::parallel(o.workers);
  const std::string algo =
      o.algos.empty() ? (forward ? "abia" : "scan") : o.algos.front();
  if (forward) {
    print_vector(forward_dynamics(model, in, parse_fd_algorithm(algo), plan).qdd);
  } else {
    print_vector(inverse_dynamics(model, in, parse_id_algorithm(algo), plan).tau);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scandyn: scan-based rigid-body dynamics for serial chains"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Options o;
  const std::string command = command_line(argc, argv);

  auto* links = app.add_subcommand("bench-links", "time single evaluations versus link count");
  add_common(links, o);
  links->add_option("--links", o.links, "link counts")->delimiter(',')->required();

  auto* groups = app.add_subcommand("bench-groups", "time batches versus group count");
  add_common(groups, o);
  groups->add_option("--groups", o.groups, "group counts")->delimiter(',')->required();
  groups->add_option("--links", o.links, "chain length (first value used, default 10)")
      ->delimiter(',');

  auto* verify = app.add_subcommand("verify", "run the cross-algorithm equivalence matrix");
  verify->add_option("--seed", o.seed, "first seed")->capture_default_str();
  verify->add_option("--links", o.links, "chain sizes (default 1,2,10,64,200)")
      ->delimiter(',');
  verify->add_option("--trials", o.trials, "random seeds per size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--workers", o.workers, "worker threads for parallel scans")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--inject-fault", o.fault, "corrupt an operand (testing)")
      ->check(CLI::IsMember({"none", "velocity-operand"}))
      ->capture_default_str();

  auto* id = app.add_subcommand("id", "inverse dynamics for one model and input");
  auto* fd = app.add_subcommand("fd", "forward dynamics for one model and input");
  for (auto* cmd : {id, fd}) {
    cmd->add_option("--model", o.model_path, "model JSON")->required();
    cmd->add_option("--input", o.input_path, "input JSON")->required();
    cmd->add_option("--algo", o.algos, "algorithm");
    cmd->add_option("--workers", o.workers, "worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (links->parsed()) {
      const BenchConfig cfg = to_config(o);
      return write_csv(o, cfg, command, run_links_experiment(cfg));
    }
    if (groups->parsed()) {
      BenchConfig cfg = to_config(o);
      const std::size_t chain = o.links.empty() ? 10 : o.links.front();
      if (chain < 1) throw std::invalid_argument("chain length must be >= 1");
      cfg.links = {chain};
      return write_csv(o, cfg, command, run_groups_experiment(cfg, chain));
    }
    if (verify->parsed()) {
      VerifyOptions vo;
      vo.seed = o.seed;
      if (!o.links.empty()) vo.sizes = o.links;
      vo.trials = o.trials;
      vo.workers = o.workers;
      vo.fault = o.fault == "velocity-operand" ? Fault::velocity_operand : Fault::none;
      const auto report = verify_suite(vo);
      print_report(std::cout, report);
      return report.ok() ? 0 : 1;
    }
    if (id->parsed()) return evaluate(o, false);
    if (fd->parsed()) return evaluate(o, true);
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
