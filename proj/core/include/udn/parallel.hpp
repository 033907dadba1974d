#pragma once

#include <cstdint>
#include <functional>

namespace udn {

/// Worker count: `requested` if non-zero, else the UDN_WORKERS environment
/// variable, else the hardware concurrency.
unsigned resolve_workers(unsigned requested = 0);

/// Runs body(i) for i in [0, n) on `workers` threads with dynamic chunking.
/// The first exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::uint64_t n, unsigned workers, const std::function<void(std::uint64_t)>& body);

}  // namespace udn
