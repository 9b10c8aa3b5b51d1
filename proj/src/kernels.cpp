#include "sharptrace/kernels.hpp"

#include <cstdlib>
#include <string>

namespace sharptrace::kernels {

void multiply_pointwise(Execution exec, std::span<cdouble> data,
                        std::span<const cdouble> factor) {
  for_each_index(exec, data.size(), [&](std::size_t i) { data[i] *= factor[i]; });
}

namespace {
int default_workers() { return omp_get_num_procs(); }
}  // namespace

int worker_count() { return omp_get_max_threads(); }

void set_worker_count(int workers) {
  omp_set_num_threads(workers < 1 ? default_workers() : workers);
}

int configure_workers_from_env() {
  if (const char* env = std::getenv("SHARPTRACE_THREADS")) {
    try {
      set_worker_count(std::stoi(env));
    } catch (const std::exception&) {
      set_worker_count(0);
    }
  }
  return worker_count();
}

}  // namespace sharptrace::kernels
