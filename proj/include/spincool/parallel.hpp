#pragma once

#include <cstddef>

#ifdef SPINCOOL_HAS_OPENMP
#include <omp.h>
#endif

namespace spincool {

// Sweep loops are embarrassingly parallel over grid points / sample chunks.
// Every parallel entry point also takes ExecPolicy::Serial, which runs the
// identical body in plain loop order; tests compare the two and the bench
// tool times them.  Results are written to preassigned slots, so the output
// is byte-identical for any thread count.
enum class ExecPolicy { Serial, Parallel };

template <typename Body>
void parallel_for(std::size_t n, ExecPolicy policy, Body&& body) {
    if (policy == ExecPolicy::Serial) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
#ifdef SPINCOOL_HAS_OPENMP
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        body(static_cast<std::size_t>(i));
#else
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

inline void set_worker_cap(int n_threads) {
#ifdef SPINCOOL_HAS_OPENMP
    if (n_threads > 0) omp_set_num_threads(n_threads);
#else
    (void)n_threads;
#endif
}

inline int worker_count() {
#ifdef SPINCOOL_HAS_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace spincool
