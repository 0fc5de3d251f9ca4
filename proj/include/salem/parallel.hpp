// Minimal shard scheduler shared by the enumerators and the CLI.
#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace salem {

struct Cancelled : std::runtime_error {
  Cancelled() : std::runtime_error("cancelled") {}
};

// Runs fn(i) for every index in `order` on up to `workers` threads. Workers
// pick the next index from a shared cursor, so completion order varies but
// each index runs exactly once. A set `cancel` flag stops dispatch at shard
// boundaries and makes run_shards throw Cancelled once in-flight shards
// finish. The first exception thrown by fn is rethrown after all workers
// have stopped.
void run_shards(const std::vector<std::size_t>& order, int workers, const std::function<void(std::size_t)>& fn,
                const std::atomic<bool>* cancel = nullptr);

// 0, 1, ..., n-1.
std::vector<std::size_t> identity_order(std::size_t n);

}  // namespace salem
