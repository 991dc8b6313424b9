#pragma once

#include <exception>
#include <limits>

#include <Eigen/Core>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace duet {

/// Static-schedule loop over [0, n). Each index must write only its own
/// output slot, which keeps results independent of the thread count.
/// An exception from the lowest failing index is rethrown after the loop.
template <class Body>
void parallel_for(Eigen::Index n, Body&& body) {
#ifdef _OPENMP
    std::exception_ptr error;
    Eigen::Index error_index = std::numeric_limits<Eigen::Index>::max();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
#pragma omp critical(duet_parallel_for_error)
            if (i < error_index) {
                error_index = i;
                error = std::current_exception();
            }
        }
    }
    if (error) std::rethrow_exception(error);
#else
    for (Eigen::Index i = 0; i < n; ++i) body(i);
#endif
}

inline void set_num_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

}  // namespace duet
