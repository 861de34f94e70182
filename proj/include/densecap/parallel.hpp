#pragma once

#include <cstddef>
#include <functional>

namespace densecap {

/// Global cap on worker threads (default: hardware concurrency, at least 1).
void set_jobs(int jobs);
int jobs();

/// Run body(i) for i in [0, count) on up to jobs() threads. Work items are
/// claimed dynamically; callers write results into per-index slots so the
/// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace densecap
