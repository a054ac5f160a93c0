#pragma once

#include <cstddef>
#include <cstdint>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace defcast {

/// Loops shorter than this stay serial; thread start-up dominates below it.
inline constexpr std::size_t kParallelThreshold = 512;

inline int max_threads() {
#if defined(_OPENMP)
    return ::omp_get_max_threads();
#else
    return 1;
#endif
}

/// Static-schedule parallel loop. Each index must write only its own output
/// slot so the result does not depend on the thread count.
template <class F>
inline void parallel_for(std::size_t begin, std::size_t end, F f) {
    const auto b = static_cast<std::int64_t>(begin);
    const auto e = static_cast<std::int64_t>(end);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) if (end - begin >= kParallelThreshold)
#endif
    for (std::int64_t i = b; i < e; ++i) f(static_cast<std::size_t>(i));
}

template <class F>
inline void serial_for(std::size_t begin, std::size_t end, F f) {
    for (std::size_t i = begin; i < end; ++i) f(i);
}

}  // namespace defcast
