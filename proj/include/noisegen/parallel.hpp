#pragma once
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace noisegen {

// Failure of one work item, carrying its index.
struct IndexedError : std::runtime_error {
    IndexedError(std::size_t index, const std::string& what);
    std::size_t index;
};

// requested > 0 wins, then NOISEGEN_WORKERS, then the hardware thread count.
int resolve_workers(int requested = 0);

// Runs fn(0..n-1) on `workers` threads. Items are claimed in increasing order;
// after a failure no new items start, and the failure with the lowest index
// is rethrown as an IndexedError.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace noisegen
