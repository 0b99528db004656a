#pragma once

#include <cstddef>
#include <functional>

namespace imbibe {

/// Number of workers to use for `requested` (0 = hardware concurrency).
std::size_t resolve_threads(std::size_t requested) noexcept;

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Order of
/// execution is unspecified; the first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, std::size_t threads = 0);

} // namespace imbibe
