#include "gridtune/worker_pool.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace gridtune::opt {

WorkerPool::WorkerPool(std::size_t limit) : limit_(std::max<std::size_t>(limit, 1)) {}

void WorkerPool::run(std::size_t count, const std::function<void(std::size_t)>& task) const
{
    std::vector<std::exception_ptr> errors(count);
    const std::size_t workers = std::min(limit_, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    task(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            threads.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

std::size_t resolve_thread_limit(std::size_t requested)
{
    std::size_t limit = requested;
    if (limit == 0)
        limit = std::max<std::size_t>(std::thread::hardware_concurrency(), 1);
    if (const char* env = std::getenv("GRIDTUNE_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1)
                limit = std::min(limit, static_cast<std::size_t>(cap));
        } catch (const std::exception&) {
            // unparsable cap: ignore
        }
    }
    return std::max<std::size_t>(limit, 1);
}

} // namespace gridtune::opt
