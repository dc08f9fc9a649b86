#pragma once

#include <cstddef>
#include <functional>

namespace fcc {

/// Worker count for the row/edge parallel kernels. Results never depend on
/// it: every output slot is written by exactly one worker in a fixed order.
struct Parallelism {
  unsigned workers = 1;

  static Parallelism hardware();
};

/// Splits [0, count) into at most `workers` contiguous chunks and runs
/// body(begin, end) for each. Chunk boundaries depend only on count and
/// workers. The calling thread runs the first chunk.
void parallel_for(std::size_t count, const Parallelism& parallelism,
                  const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace fcc
