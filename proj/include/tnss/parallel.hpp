#pragma once

#include <cstddef>
#include <functional>

namespace tnss {

/// Run fn(i) for every i in [0, n), spreading the iterations over hardware
/// threads when more than one is available. Callers must write only to
/// per-index slots; the result must not depend on scheduling. Exceptions
/// thrown by fn are collected and the first one is rethrown after all
/// threads join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace tnss
