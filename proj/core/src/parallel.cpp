#include "fcc/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace fcc {

Parallelism Parallelism::hardware() {
  return {std::max(1u, std::thread::hardware_concurrency())};
}

void parallel_for(std::size_t count, const Parallelism& parallelism,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t chunks = std::clamp<std::size_t>(parallelism.workers, 1, count);
  if (chunks == 1) {
    body(0, count);
    return;
  }
  const std::size_t step = (count + chunks - 1) / chunks;
  std::vector<std::exception_ptr> errors(chunks);
  {
    std::vector<std::jthread> threads;
    threads.reserve(chunks - 1);
    for (std::size_t c = 1; c < chunks; ++c) {
      const std::size_t begin = std::min(count, c * step);
      const std::size_t end = std::min(count, begin + step);
      threads.emplace_back([&, c, begin, end] {
        try {
          if (begin < end) body(begin, end);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
    try {
      body(0, std::min(count, step));
    } catch (...) {
      errors[0] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace fcc
