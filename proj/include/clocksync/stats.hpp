#pragma once

// Ensemble aggregation shared by the direct simulator and the
// event-conditioned (variance-reduced) estimator.
//
// Replicas are independent by construction (one RNG stream per replica
// index), so the work can be distributed over any number of threads.
// Results are stored per replica and reduced sequentially in replica
// order with compensated summation, which makes the ensemble statistics
// byte-identical regardless of the thread count.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "clocksync/common.hpp"
#include "clocksync/model.hpp"

namespace clocksync {

// Per-observation-time ensemble mean and standard error of the three
// configuration statistics. Standard errors are NaN when replicas == 1
// (rendered as empty fields by the CSV writer).
struct EnsembleStats {
  std::vector<double> times;
  std::vector<double> R_mean, R_se;
  std::vector<double> D_mean, D_se;
  std::vector<double> d_mean, d_se;
  std::int64_t replicas = 0;

  std::size_t size() const { return times.size(); }
};

namespace detail {

// Runs `replica_fn(replica_index, out)` for every replica index in
// [0, n_replicas), where `out` is a span of obs_count moment vectors to
// fill. Worker threads claim replica indices from a shared atomic
// counter; the reduction below never depends on the claim order.
inline std::vector<std::vector<MomentVector>> run_replicas_parallel(
    std::int64_t n_replicas, std::size_t obs_count, int threads,
    const std::function<void(std::int64_t, std::span<MomentVector>)>&
        replica_fn) {
  require(n_replicas >= 1, errc::invalid_input,
          "ensemble: need at least one replica");
  std::vector<std::vector<MomentVector>> results(
      static_cast<std::size_t>(n_replicas));
  for (auto& row : results) row.resize(obs_count);

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  std::size_t n_threads = threads > 0 ? static_cast<std::size_t>(threads)
                                      : static_cast<std::size_t>(hw);
  if (n_threads > static_cast<std::size_t>(n_replicas))
    n_threads = static_cast<std::size_t>(n_replicas);

  if (n_threads <= 1) {
    for (std::int64_t i = 0; i < n_replicas; ++i)
      replica_fn(i, std::span<MomentVector>(results[static_cast<std::size_t>(i)]));
    return results;
  }

  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n_replicas) return;
      try {
        replica_fn(i, std::span<MomentVector>(results[static_cast<std::size_t>(i)]));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

// Two-pass compensated mean / standard-error reduction in replica order.
inline EnsembleStats reduce_replicas(
    std::span<const double> times,
    const std::vector<std::vector<MomentVector>>& results) {
  const auto n = static_cast<std::int64_t>(results.size());
  EnsembleStats out;
  out.times.assign(times.begin(), times.end());
  out.replicas = n;
  const std::size_t m = times.size();
  out.R_mean.resize(m);
  out.R_se.resize(m);
  out.D_mean.resize(m);
  out.D_se.resize(m);
  out.d_mean.resize(m);
  out.d_se.resize(m);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = 0; j < m; ++j) {
    neumaier_sum sR, sD, sd;
    for (const auto& row : results) {
      sR.add(row[j].R);
      sD.add(row[j].D);
      sd.add(row[j].d);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    const double mR = sR.value() * inv_n;
    const double mD = sD.value() * inv_n;
    const double md = sd.value() * inv_n;
    out.R_mean[j] = mR;
    out.D_mean[j] = mD;
    out.d_mean[j] = md;
    if (n < 2) {
      out.R_se[j] = nan;
      out.D_se[j] = nan;
      out.d_se[j] = nan;
      continue;
    }
    neumaier_sum vR, vD, vd;
    for (const auto& row : results) {
      const double eR = row[j].R - mR;
      const double eD = row[j].D - mD;
      const double ed = row[j].d - md;
      vR.add(eR * eR);
      vD.add(eD * eD);
      vd.add(ed * ed);
    }
    const double denom = static_cast<double>(n) * static_cast<double>(n - 1);
    out.R_se[j] = std::sqrt(vR.value() / denom);
    out.D_se[j] = std::sqrt(vD.value() / denom);
    out.d_se[j] = std::sqrt(vd.value() / denom);
  }
  return out;
}

inline void validate_obs_times(std::span<const double> obs_times) {
  require(!obs_times.empty(), errc::invalid_input,
          "ensemble: need at least one observation time");
  double prev = -1.0;
  for (double t : obs_times) {
    require(finite(t) && t >= 0.0 && t > prev, errc::invalid_input,
            "ensemble: observation times must be finite, >= 0, strictly "
            "increasing");
    prev = t;
  }
}

}  // namespace detail
}  // namespace clocksync
