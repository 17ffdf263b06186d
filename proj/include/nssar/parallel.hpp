/*
 * Execution policy for the data-parallel kernels (sweep grids, optimizer
 * grids, Monte Carlo trials). Each parallel loop body writes only to its own
 * output slot, so the OpenMP path produces bit-identical results to the
 * serial reference; tests assert that equivalence and the benchmark tool
 * compares their throughput.
 */
#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nssar {

enum class ExecPolicy { serial, openmp };

template <typename Body>
void parallel_for(std::size_t n, ExecPolicy policy, Body&& body) {
#ifdef _OPENMP
    if (policy == ExecPolicy::openmp) {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            body(static_cast<std::size_t>(i));
        return;
    }
#else
    (void)policy;
#endif
    for (std::size_t i = 0; i < n; ++i) body(i);
}

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace nssar
