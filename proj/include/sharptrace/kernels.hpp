#pragma once

// Data-parallel building blocks. Every kernel has a serial reference path and
// an OpenMP path; both produce bit-identical results because reductions are
// always performed serially in index order after the parallel map.

#include <atomic>
#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#include <omp.h>

#include "sharptrace/types.hpp"

namespace sharptrace {

enum class Execution { serial, parallel };

namespace kernels {

/// Calls fn(i) for i in [0, count). Exceptions thrown by fn are rethrown on
/// the calling thread (the first one wins).
template <class Fn>
void for_each_index(Execution exec, std::size_t count, Fn&& fn) {
  if (exec == Execution::serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(sharptrace_kernel_error)
      {
        if (!error) error = std::current_exception();
      }
      failed.store(true, std::memory_order_relaxed);
    }
  }
  if (error) std::rethrow_exception(error);
}

/// Evaluates fn(i) into a buffer, then sums in index order.
template <class T, class Fn>
T ordered_sum(Execution exec, std::size_t count, Fn&& fn) {
  std::vector<T> terms(count);
  for_each_index(exec, count, [&](std::size_t i) { terms[i] = fn(i); });
  T total{};
  for (const T& t : terms) total += t;
  return total;
}

/// data[i] *= factor[i]
void multiply_pointwise(Execution exec, std::span<cdouble> data,
                        std::span<const cdouble> factor);

/// Number of OpenMP workers that parallel kernels will use.
int worker_count();

/// Sets the worker count; values < 1 restore the default (all cores).
void set_worker_count(int workers);

/// Applies SHARPTRACE_THREADS from the environment if set. Returns the count in effect.
int configure_workers_from_env();

}  // namespace kernels
}  // namespace sharptrace
