#pragma once

#include <cstddef>
#include <functional>

namespace hwl {

// Worker count: HWL_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

// Runs body(chunk, begin, end) over `chunks` fixed contiguous slices of [0, n).
// Chunk boundaries depend only on n and chunks, never on the thread count.
void parallel_chunks(std::size_t n, std::size_t chunks,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

}  // namespace hwl
