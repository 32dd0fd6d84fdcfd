#include "scandyn/bench.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

using namespace scandyn;
using namespace scandyn::bench;

namespace {

BenchConfig small_config(Mode mode, std::vector<std::string> algos) {
  BenchConfig cfg;
  cfg.mode = mode;
  cfg.algos = std::move(algos);
  cfg.repeats = 3;
  cfg.warmup = 1;
  cfg.seed = 5;
  return cfg;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

TEST(BenchConfig, RejectsInvalid) {
  auto cfg = small_config(Mode::id, {"recursive"});
  cfg.links = {1};
  EXPECT_NO_THROW(cfg.check());
  cfg.repeats = 0;
  EXPECT_THROW(cfg.check(), std::invalid_argument);
  cfg.repeats = 1;
  cfg.links = {0};
  EXPECT_THROW(cfg.check(), std::invalid_argument);
  cfg.links = {1};
  cfg.algos = {"abia"};
  EXPECT_THROW(cfg.check(), std::invalid_argument);
  cfg.mode = Mode::fd;
  EXPECT_NO_THROW(cfg.check());
  cfg.workers = 0;
  EXPECT_THROW(cfg.check(), std::invalid_argument);
}

TEST(LinksExperiment, SingleRow) {
  auto cfg = small_config(Mode::id, {"recursive"});
  cfg.links = {1};
  cfg.repeats = 1;
  const auto rows = run_links_experiment(cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(std::isfinite(rows[0].mean_ns));
  EXPECT_GT(rows[0].mean_ns, 0.0);
  EXPECT_TRUE(std::isnan(rows[0].max_rel_err));
  EXPECT_FALSE(rows[0].scan_depth.has_value());
}

TEST(LinksExperiment, VerifyPopulatesErrors) {
  for (Mode mode : {Mode::id, Mode::fd}) {
    auto cfg = small_config(mode, mode == Mode::id ? id_algorithms() : fd_algorithms());
    cfg.links = {1, 7, 40};
    cfg.verify = true;
    cfg.workers = 2;
    const auto rows = run_links_experiment(cfg);
    EXPECT_EQ(rows.size(), 3 * cfg.algos.size());
    for (const auto& r : rows) {
      EXPECT_LE(r.max_rel_err, 1e-8) << r.algo << " n=" << r.links;
      EXPECT_EQ(r.repeats, 3u);
    }
  }
}

TEST(LinksExperiment, RecursionTimeGrowsWithLinks) {
  auto cfg = small_config(Mode::id, {"recursive"});
  for (std::size_t n = 10; n <= 200; n += 10) cfg.links.push_back(n);
  cfg.repeats = 200;
  cfg.warmup = 10;
  const auto rows = run_links_experiment(cfg);
  // Spearman rank correlation between n and mean time.
  const std::size_t m = rows.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return rows[a].mean_ns < rows[b].mean_ns; });
  double d2 = 0.0;
  for (std::size_t rank = 0; rank < m; ++rank) {
    const double d = static_cast<double>(rank) - static_cast<double>(order[rank]);
    d2 += d * d;
  }
  const double rho = 1.0 - 6.0 * d2 / (static_cast<double>(m) * (m * m - 1.0));
  EXPECT_GT(rho, 0.95);
}

TEST(LinksExperiment, NonTimingColumnsDeterministic) {
  auto cfg = small_config(Mode::fd, {"abia", "abia_merged"});
  cfg.links = {3, 12};
  cfg.verify = true;
  const auto a = run_links_experiment(cfg), b = run_links_experiment(cfg);
  cfg.workers = 4;
  const auto c = run_links_experiment(cfg);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].max_rel_err, b[k].max_rel_err);
    EXPECT_EQ(a[k].max_rel_err, c[k].max_rel_err);
    EXPECT_EQ(a[k].scan_depth, b[k].scan_depth);
  }
}

TEST(GroupsExperiment, RowCount) {
  auto cfg = small_config(Mode::id, {"recursive", "scan"});
  cfg.groups = {1, 4, 9};
  cfg.workers = 3;
  cfg.verify = true;
  const auto rows = run_groups_experiment(cfg, 10);
  EXPECT_EQ(rows.size(), cfg.groups.size() * cfg.algos.size() * plan_variants(cfg).size());
  EXPECT_EQ(rows.front().algo, "recursive@w1");
  for (const auto& r : rows) {
    EXPECT_EQ(r.links, 10u);
    EXPECT_LE(r.max_rel_err, 1e-8);
  }
  cfg.workers = 1;
  EXPECT_EQ(run_groups_experiment(cfg, 10).size(), cfg.groups.size() * cfg.algos.size());
}

TEST(GroupsExperiment, FdBatchVerified) {
  auto cfg = small_config(Mode::fd, {"jsiia", "abia_merged"});
  cfg.groups = {5};
  cfg.workers = 2;
  cfg.verify = true;
  for (const auto& r : run_groups_experiment(cfg, 6)) EXPECT_LE(r.max_rel_err, 1e-8);
}

TEST(Csv, HeaderAndRows) {
  auto cfg = small_config(Mode::id, {"scan"});
  cfg.links = {4};
  std::ostringstream os;
  write_provenance(os, "scandyn bench-links --links 4", cfg);
  for (const auto& r : run_links_experiment(cfg)) write_row(os, r);
  std::istringstream is(os.str());
  std::string line;
  std::vector<std::string> comments, data;
  while (std::getline(is, line)) (line.rfind('#', 0) == 0 ? comments : data).push_back(line);

  const std::string all = os.str();
  for (const char* needle : {"scandyn 0.1.0", "seed: 5", "workers: 1", Rng::kName,
                             "home translation norm"}) {
    EXPECT_NE(all.find(needle), std::string::npos) << needle;
  }
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data[0], "mode,algo,links,groups,repeats,mean_ns,std_ns,max_rel_err,scan_depth");
  const auto cells = split(data[1]);
  ASSERT_EQ(cells.size(), 9u);
  EXPECT_EQ(cells[0], "id");
  EXPECT_EQ(cells[1], "scan");
  EXPECT_EQ(cells[2], "4");
  EXPECT_EQ(cells[7], "nan");
  EXPECT_EQ(cells[8], std::to_string(*pipeline_scan_depth(Mode::id, "scan", 4,
                                                          ScanPlan::parallel(1))));
}

TEST(Csv, EmptyScanDepthForRecursion) {
  std::ostringstream os;
  write_row(os, {"id", "recursive", 3, 1, 1, 10.0, 0.0, 0.0, std::nullopt});
  EXPECT_EQ(os.str(), "id,recursive,3,1,1,10.0,0.0,0,\n");
}

TEST(ScanDepth, LogarithmicInLinks) {
  const auto plan = ScanPlan::parallel(4);
  // abia_merged runs three scans of length at most n + 1.
  for (std::size_t n : {2u, 64u, 1000u, 4096u}) {
    const auto bound = 3 * 2 * static_cast<std::size_t>(std::ceil(std::log2(n + 1.0)));
    EXPECT_LE(*pipeline_scan_depth(Mode::fd, "abia_merged", n, plan), bound) << "n=" << n;
  }
  EXPECT_EQ(*pipeline_scan_depth(Mode::fd, "abia_merged", 64, ScanPlan::sequential()),
            63u + 64u + 63u);
  EXPECT_LT(*pipeline_scan_depth(Mode::id, "scan_fused", 100, plan),
            *pipeline_scan_depth(Mode::id, "scan", 100, plan));
}

TEST(VerifySuite, DefaultSizesPass) {
  VerifyOptions opt;
  opt.trials = 3;
  const auto report = verify_suite(opt);
  EXPECT_EQ(report.cells.size(), 5u * 10u);
  EXPECT_TRUE(report.ok());
}

TEST(VerifySuite, SingleLinkPasses) {
  VerifyOptions opt;
  opt.sizes = {1};
  const auto report = verify_suite(opt);
  EXPECT_TRUE(report.ok());
}

TEST(VerifySuite, FaultIsNamed) {
  VerifyOptions opt;
  opt.sizes = {4};
  opt.trials = 2;
  opt.fault = Fault::velocity_operand;
  const auto report = verify_suite(opt);
  EXPECT_FALSE(report.ok());
  std::ostringstream os;
  print_report(os, report);
  EXPECT_NE(os.str().find("FAIL id_scan/sequential vs id_recursive"), std::string::npos);
  EXPECT_NE(os.str().find("worst_seed="), std::string::npos);
}

}  // namespace
