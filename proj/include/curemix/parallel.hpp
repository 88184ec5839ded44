#pragma once

#include <cstddef>
#include <functional>

namespace curemix {

unsigned default_thread_count();

//! Runs body(0..count-1) on up to `threads` workers (0 = hardware count).
//! The first exception thrown by a body is rethrown after all workers join.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

} // namespace curemix
