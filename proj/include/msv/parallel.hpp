#pragma once

#include <functional>

namespace msv {

/// Runs fn(i) for i = 0..count-1 on up to `jobs` threads (the calling thread
/// works too). Work items are claimed from a shared counter, so outputs must
/// be written to per-index slots. The first exception thrown by any item is
/// rethrown after all workers drain. jobs <= 1 runs everything inline.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace msv
