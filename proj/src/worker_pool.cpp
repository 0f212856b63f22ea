#include "dgc/worker_pool.hpp"

namespace dgc {

WorkerPool::WorkerPool(std::size_t threads) {
    const std::size_t extra = threads > 1 ? threads - 1 : 0;
    workers_.reserve(extra);
    for (std::size_t lane = 1; lane <= extra; ++lane) workers_.emplace_back([this, lane] { work(lane); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    start_.notify_all();
    for (auto& t : workers_) t.join();
}

void WorkerPool::run_lane(std::size_t lane) {
    const auto lanes = thread_count();
    try {
        for (std::size_t i = lane; i < count_; i += lanes) (*task_)(i);
    } catch (...) {
        std::lock_guard lock(mutex_);
        if (!error_) error_ = std::current_exception();
    }
}

void WorkerPool::work(std::size_t lane) {
    std::size_t seen = 0;
    while (true) {
        {
            std::unique_lock lock(mutex_);
            start_.wait(lock, [&] { return stopping_ || generation_ != seen; });
            if (stopping_) return;
            seen = generation_;
        }
        run_lane(lane);
        {
            std::lock_guard lock(mutex_);
            if (--pending_ == 0) done_.notify_one();
        }
    }
}

void WorkerPool::run(std::size_t n, const std::function<void(std::size_t)>& task) {
    if (workers_.empty()) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    {
        std::lock_guard lock(mutex_);
        task_ = &task;
        count_ = n;
        pending_ = workers_.size();
        error_ = nullptr;
        ++generation_;
    }
    start_.notify_all();
    run_lane(0);
    std::exception_ptr error;
    {
        std::unique_lock lock(mutex_);
        done_.wait(lock, [&] { return pending_ == 0; });
        error = error_;
        task_ = nullptr;
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace dgc
