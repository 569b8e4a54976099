#ifndef TRUNCEM_PARALLEL_HPP
#define TRUNCEM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace truncem {

/// Evaluates f(0), ..., f(n-1) on up to `threads` workers and returns the
/// results in index order. The first exception by index is rethrown after all
/// workers finish, so the outcome does not depend on scheduling.
template <class F>
auto parallel_map(std::size_t n, int threads, F&& f) {
  using R = std::decay_t<std::invoke_result_t<F&, std::size_t>>;
  std::vector<R> out(n);
  std::vector<std::exception_ptr> errors(n);
  const auto workers = static_cast<std::size_t>(std::clamp<long>(threads, 1, static_cast<long>(std::max<std::size_t>(n, 1))));
  auto body = [&](std::atomic<std::size_t>& next) {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::atomic<std::size_t> next{0};
  if (workers <= 1) {
    body(next);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back([&] { body(next); });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace truncem

#endif  // TRUNCEM_PARALLEL_HPP
