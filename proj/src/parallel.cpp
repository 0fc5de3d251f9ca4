#include "salem/parallel.hpp"

#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace salem {

void run_shards(const std::vector<std::size_t>& order, int workers, const std::function<void(std::size_t)>& fn,
                const std::atomic<bool>* cancel) {
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    while (true) {
      if (failed.load() || (cancel != nullptr && cancel->load())) return;
      const std::size_t slot = cursor.fetch_add(1);
      if (slot >= order.size()) return;
      try {
        fn(order[slot]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const std::size_t n = std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(workers, 1)));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  if (cancel != nullptr && cancel->load() && cursor.load() < order.size()) throw Cancelled();
}

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

}  // namespace salem
