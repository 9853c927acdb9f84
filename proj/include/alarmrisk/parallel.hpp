#pragma once
// Execution policy for the data-parallel kernels (CV folds, pairwise CMI,
// stepwise candidates). Serial is the reference path; Parallel must produce
// bit-identical results because every iteration writes its own slot and
// reductions happen afterwards in index order.

#include <cstddef>
#include <exception>
#include <mutex>

namespace alarmrisk {

enum class Execution { Serial, Parallel };

int available_threads();

// Runs body(i) for i in [0, n). If iterations throw, the exception of the
// lowest failing index is rethrown after the loop.
template <class Body>
void for_each_index(std::size_t n, Execution exec, Body&& body) {
    std::exception_ptr failure;
    std::mutex m;
    const long count = static_cast<long>(n);
    long failed_at = count;
#pragma omp parallel for schedule(dynamic) if (exec == Execution::Parallel)
    for (long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(m);
            if (i < failed_at) {
                failed_at = i;
                failure = std::current_exception();
            }
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace alarmrisk
