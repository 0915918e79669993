#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace crn::par {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// n <= 0 keeps the runtime default (machine parallelism).
inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace crn::par
