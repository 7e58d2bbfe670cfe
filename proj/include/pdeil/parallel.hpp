#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pdeil {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Elementwise parallel map. Each index is computed independently, so results
// are bitwise identical to the serial loop for any thread count.
template <typename F>
void parallel_for(std::int64_t n, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    body(i);
  }
#else
  for (std::int64_t i = 0; i < n; ++i) {
    body(i);
  }
#endif
}

}  // namespace pdeil
