#pragma once

// Prefix scans over an arbitrary associative combine.
//
// The combine is called as combine(earlier, later): the first argument always
// covers the lower-index span of the input. Non-commutative semigroups are
// therefore safe; whether the operand "acts from the left" is decided by the
// semigroup definition, not by the engine.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace scandyn {

enum class ScanStrategy { sequential, parallel };
enum class ScanDirection { forward, backward };

struct ScanPlan {
  ScanStrategy strategy = ScanStrategy::sequential;
  std::size_t worker_count = 1;
  ScanDirection direction = ScanDirection::forward;

  static ScanPlan sequential() { return {}; }
  static ScanPlan parallel(std::size_t workers) {
    return {ScanStrategy::parallel, workers, ScanDirection::forward};
  }

  ScanPlan reversed() const {
    ScanPlan p = *this;
    p.direction = direction == ScanDirection::forward ? ScanDirection::backward
                                                      : ScanDirection::forward;
    return p;
  }
  ScanPlan with_direction(ScanDirection d) const {
    ScanPlan p = *this;
    p.direction = d;
    return p;
  }
  ScanPlan with_workers(std::size_t w) const {
    ScanPlan p = *this;
    p.worker_count = w;
    return p;
  }
};

template <typename T, typename Combine>
struct Semigroup {
  Combine combine;
  std::optional<T> identity{};
};

template <typename T, typename Combine>
Semigroup<T, Combine> make_semigroup(Combine combine) {
  return {std::move(combine), std::nullopt};
}

template <typename T, typename Combine>
Semigroup<T, Combine> make_monoid(Combine combine, T identity) {
  return {std::move(combine), std::move(identity)};
}

/// Filled by the scan when requested; stages counts levels of the combine tree
/// that contained at least one combine.
struct ScanStats {
  std::size_t stages = 0;
  std::size_t combines = 0;
};

/// Runs body(begin, end) over [0, count) split into contiguous chunks, one
/// per worker. The calling thread handles the first chunk.
template <typename Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
  if (count == 0) return;
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    body(std::size_t{0}, count);
    return;
  }

  std::exception_ptr error;
  std::mutex error_mutex;
  auto guarded = [&](std::size_t b, std::size_t e) {
    try {
      body(b, e);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };

  const std::size_t chunk = count / workers, extra = count % workers;
  auto bounds = [&](std::size_t w) {
    const std::size_t b = w * chunk + std::min(w, extra);
    return std::pair{b, b + chunk + (w < extra ? 1 : 0)};
  };
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
      auto [b, e] = bounds(w);
      threads.emplace_back([&guarded, b, e] { guarded(b, e); });
    }
    auto [b, e] = bounds(0);
    guarded(b, e);
  }
  if (error) std::rethrow_exception(error);
}

namespace detail {

// Below this many independent combines a tree level runs on the calling
// thread; the combine tree itself never depends on the worker count.
inline constexpr std::size_t kMinCombinesPerLevelForThreads = 64;

template <typename T, typename Combine>
void sequential_inclusive(std::vector<T>& x, const Combine& combine,
                          ScanStats* stats) {
  for (std::size_t i = 1; i < x.size(); ++i) {
    x[i] = combine(x[i - 1], x[i]);
  }
  if (stats) {
    stats->stages = x.size() - 1;
    stats->combines = x.size() - 1;
  }
}

// Two-sweep (up-sweep / down-sweep) inclusive scan on a fixed binary tree.
template <typename T, typename Combine>
void tree_inclusive(std::vector<T>& x, const Combine& combine,
                    std::size_t workers, ScanStats* stats) {
  const std::size_t n = x.size();
  std::size_t stages = 0, combines = 0;

  auto run_level = [&](std::size_t first, std::size_t stride, std::size_t d) {
    if (first >= n) return;
    const std::size_t count = (n - 1 - first) / stride + 1;
    const std::size_t w =
        count >= kMinCombinesPerLevelForThreads ? workers : std::size_t{1};
    parallel_for(count, w, [&](std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j) {
        const std::size_t k = first + j * stride;
        x[k] = combine(x[k - d], x[k]);
      }
    });
    ++stages;
    combines += count;
  };

  std::size_t top = 1;
  for (std::size_t d = 1; d < n; d *= 2) {
    run_level(2 * d - 1, 2 * d, d);
    top = d;
  }
  for (std::size_t d = top / 2; d >= 1; d /= 2) {
    run_level(3 * d - 1, 2 * d, d);
  }

  if (stats) {
    stats->stages = stages;
    stats->combines = combines;
  }
}

}  // namespace detail

/// Inclusive scan: out[i] = a[0] (+) ... (+) a[i] for a forward plan. A
/// backward plan reverses the input, scans forward and reverses the output,
/// so out[i] = a[n-1] (+) ... (+) a[i].
template <typename T, typename Combine>
std::vector<T> inclusive_scan(std::vector<T> items,
                              const Semigroup<T, Combine>& sg,
                              const ScanPlan& plan, ScanStats* stats = nullptr) {
  if (items.empty()) throw std::invalid_argument("inclusive_scan: empty input");
  if (plan.worker_count == 0) {
    throw std::invalid_argument("inclusive_scan: worker_count must be positive");
  }
  const bool backward = plan.direction == ScanDirection::backward;
  if (backward) std::reverse(items.begin(), items.end());
  if (plan.strategy == ScanStrategy::sequential) {
    detail::sequential_inclusive(items, sg.combine, stats);
  } else {
    detail::tree_inclusive(items, sg.combine, plan.worker_count, stats);
  }
  if (backward) std::reverse(items.begin(), items.end());
  return items;
}

/// Exclusive scan: out[first] = identity, then each element is the fold of
/// everything strictly before it in scan order.
template <typename T, typename Combine>
std::vector<T> exclusive_scan(std::vector<T> items,
                              const Semigroup<T, Combine>& sg,
                              const ScanPlan& plan, ScanStats* stats = nullptr) {
  if (!sg.identity) {
    throw std::invalid_argument("exclusive_scan: semigroup has no identity");
  }
  if (items.empty()) throw std::invalid_argument("exclusive_scan: empty input");
  const bool backward = plan.direction == ScanDirection::backward;
  if (backward) std::reverse(items.begin(), items.end());
  items.insert(items.begin(), *sg.identity);
  items.pop_back();
  auto out = inclusive_scan(std::move(items), sg,
                            plan.with_direction(ScanDirection::forward), stats);
  if (backward) std::reverse(out.begin(), out.end());
  return out;
}

/// Number of dependent combine stages a scan of length n executes.
inline std::size_t depth_counter(std::size_t n, const ScanPlan& plan) {
  if (n <= 1) return 0;
  if (plan.strategy == ScanStrategy::sequential) return n - 1;
  std::size_t stages = 0, top = 1;
  for (std::size_t d = 1; d < n; d *= 2) {
    if (2 * d - 1 < n) ++stages;
    top = d;
  }
  for (std::size_t d = top / 2; d >= 1; d /= 2) {
    if (3 * d - 1 < n) ++stages;
  }
  return stages;
}

}  // namespace scandyn
