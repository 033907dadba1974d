#include "udn/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string_view>
#include <thread>
#include <vector>

namespace udn {

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("UDN_WORKERS")) {
    unsigned v = 0;
    const std::string_view s(env);
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc{} && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::uint64_t n, unsigned workers, const std::function<void(std::uint64_t)>& body) {
  if (n == 0) return;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, workers), n));
  if (workers == 1) {
    for (std::uint64_t i = 0; i < n; ++i) body(i);
    return;
  }

  const std::uint64_t chunk = std::max<std::uint64_t>(1, n / (std::uint64_t{workers} * 16));
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto work = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::uint64_t begin = next.fetch_add(chunk);
      if (begin >= n) return;
      const std::uint64_t end = std::min(n, begin + chunk);
      try {
        for (std::uint64_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace udn
