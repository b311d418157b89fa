#ifndef UIND_PARALLEL_HPP
#define UIND_PARALLEL_HPP

#include <cstdint>
#include <thread>
#include <vector>

namespace uind {

inline unsigned default_jobs() {
  unsigned n = std::thread::hardware_concurrency();
  return n ? n : 1;
}

// Splits [0, total) into one contiguous chunk per worker and runs
// fn(worker, begin, end) on each. Callers own the deterministic merge of
// per-worker results; output must never depend on the worker count.
template <class Fn>
void parallel_chunks(std::uint64_t total, unsigned jobs, Fn&& fn) {
  if (jobs == 0) jobs = 1;
  if (jobs == 1 || total <= 1) {
    fn(0u, std::uint64_t{0}, total);
    return;
  }
  if (jobs > total) jobs = static_cast<unsigned>(total);
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  std::uint64_t chunk = total / jobs, rem = total % jobs, begin = 0;
  for (unsigned w = 0; w < jobs; ++w) {
    std::uint64_t end = begin + chunk + (w < rem ? 1 : 0);
    workers.emplace_back([&fn, w, begin, end] { fn(w, begin, end); });
    begin = end;
  }
  for (auto& t : workers) t.join();
}

}  // namespace uind

#endif
