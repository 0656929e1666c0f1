#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "jf/common/error.hpp"

namespace jf::llm {

template <class T>
struct BatchResult {
  std::optional<T> value;
  std::string error;

  bool ok() const { return value.has_value(); }
};

/// Runs every job on at most `parallelism` worker threads. Results come back
/// in input order; an exception thrown by one job becomes that job's error
/// record and never stops the others. `on_done(index)` fires after each job
/// (from a worker thread) and may be empty.
template <class Job, class R = std::invoke_result_t<Job&>>
std::vector<BatchResult<R>> run_batch(std::vector<Job>& jobs, std::size_t parallelism,
                                      const std::function<void(std::size_t)>& on_done = {}) {
  static_assert(!std::is_void_v<R>, "batch jobs must return a value");
  if (parallelism == 0) throw ValidationError("parallelism must be >= 1");
  std::vector<BatchResult<R>> results(jobs.size());
  if (jobs.empty()) return results;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i].value.emplace(jobs[i]());
      } catch (const std::exception& e) {
        results[i].error = e.what();
      } catch (...) {
        results[i].error = "unknown error";
      }
      if (on_done) on_done(i);
    }
  };

  const std::size_t n_threads = std::min(parallelism, jobs.size());
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& th : threads) th.join();
  return results;
}

}  // namespace jf::llm
