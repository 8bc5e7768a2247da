#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace q1d {

inline unsigned resolve_threads(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1u;
}

/**
 * Runs fn(i) for i in [0, n) on up to `threads` workers. Work is split into
 * contiguous index blocks; callers write into index-addressed slots, so the
 * output layout never depends on scheduling.
 */
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
  unsigned nt = resolve_threads(threads);
  if (nt <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (nt > n) nt = static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::size_t chunk = (n + nt - 1) / nt;
  for (unsigned w = 0; w < nt; ++w) {
    const std::size_t lo = static_cast<std::size_t>(w) * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/**
 * Pairwise tree sum with a fixed association order. Used for ensemble
 * reductions so sums are bit-stable and better conditioned than naive
 * left-to-right accumulation.
 */
template <typename T>
T pairwise_sum(std::span<const T> v) {
  if (v.empty()) return T{};
  if (v.size() <= 8) {
    T acc = v[0];
    for (std::size_t i = 1; i < v.size(); ++i) acc += v[i];
    return acc;
  }
  const std::size_t mid = v.size() / 2;
  return pairwise_sum(v.subspan(0, mid)) + pairwise_sum(v.subspan(mid));
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(std::span<const T>(v.data(), v.size()));
}

} // namespace q1d
