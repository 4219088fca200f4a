#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace bhd {

// Execution path for data-parallel kernels. Serial is the reference
// implementation; both paths produce bitwise-identical results.
enum class Exec { serial, parallel };

// Runs body(i) for i in [0, n), either in order or as an OpenMP loop. The
// first exception thrown by any iteration is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t n, Body&& body, Exec exec, bool dynamic = true) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  auto guarded = [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (dynamic) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < count; ++i) guarded(static_cast<std::size_t>(i));
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) guarded(static_cast<std::size_t>(i));
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace bhd
