#pragma once

#include <cstddef>
#include <functional>

namespace gridtune::opt {

/// Runs batches of independent indexed tasks on at most `limit` threads.
/// Every task runs to completion; afterwards the exception from the
/// lowest-indexed failing task, if any, is rethrown.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t limit);

    std::size_t limit() const noexcept { return limit_; }

    void run(std::size_t count, const std::function<void(std::size_t)>& task) const;

private:
    std::size_t limit_;
};

/// Worker count from a requested value (0 = hardware concurrency), capped by
/// the GRIDTUNE_THREADS environment variable when it is set.
std::size_t resolve_thread_limit(std::size_t requested);

} // namespace gridtune::opt
