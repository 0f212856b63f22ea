#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dgc {

/// Fixed set of threads that execute one indexed batch at a time. `run`
/// returns only after every index has been processed, which gives the
/// engine its barrier between synchronous sub-rounds.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t threads);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    std::size_t thread_count() const noexcept { return workers_.size() + 1; }

    /// Calls task(i) for i in [0, n). Index i always runs on lane i % lanes,
    /// the caller participating as lane 0. The first exception is rethrown.
    void run(std::size_t n, const std::function<void(std::size_t)>& task);

private:
    void work(std::size_t lane);
    void run_lane(std::size_t lane);

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable start_;
    std::condition_variable done_;
    const std::function<void(std::size_t)>* task_ = nullptr;
    std::size_t count_ = 0;
    std::size_t generation_ = 0;
    std::size_t pending_ = 0;
    bool stopping_ = false;
    std::exception_ptr error_;
};

}  // namespace dgc
