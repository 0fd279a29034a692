#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace das::par {

/// threads <= 0 means "use everything the runtime offers"; 1 is the serial
/// reference path that every parallel result must match byte for byte.
inline int resolve_threads(int requested) {
#ifdef _OPENMP
  if (requested <= 0) return omp_get_max_threads();
  return requested;
#else
  (void)requested;
  return 1;
#endif
}

/// Runs fn(i) for every i in [0, n). With threads == 1 this is a plain loop
/// (the reference implementation); otherwise the iterations run under OpenMP.
/// fn must only write to its own slot in preallocated storage, which is what
/// makes the two paths produce identical results regardless of schedule.
/// The lowest-index exception wins and is rethrown after the region joins, so
/// error behaviour is deterministic too.
template <class Fn>
void for_each_index(std::size_t n, int threads, Fn&& fn) {
  if (n == 0) return;
  threads = resolve_threads(threads);
  if (threads == 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
  std::exception_ptr first_error = nullptr;
  std::size_t first_error_index = n;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(das_par_error)
      {
        if (static_cast<std::size_t>(i) < first_error_index) {
          first_error_index = static_cast<std::size_t>(i);
          first_error = std::current_exception();
        }
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
#else
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

/// Map [0, n) through fn into a vector, slot per index.
template <class Out, class Fn>
std::vector<Out> map_indexed(std::size_t n, int threads, Fn&& fn) {
  std::vector<Out> out(n);
  for_each_index(n, threads, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace das::par
