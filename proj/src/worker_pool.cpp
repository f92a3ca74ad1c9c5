// worker_pool.cpp

#include "heom/worker_pool.hpp"

#include <cstdlib>
#include <string>

namespace heom {

WorkerPool::WorkerPool(unsigned threads) {
    const unsigned extra = threads > 1 ? threads - 1 : 0;
    workers_.reserve(extra);
    for (unsigned i = 0; i < extra; ++i) workers_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    wake_.notify_all();
    for (auto& w : workers_) w.join();
}

unsigned WorkerPool::default_threads() {
    if (const char* env = std::getenv("HEOM_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return static_cast<unsigned>(n);
        } catch (...) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void WorkerPool::drain() {
    for (;;) {
        std::size_t task;
        {
            std::lock_guard lock(mutex_);
            if (next_ >= total_) return;
            task = next_++;
        }
        (*job_)(task);
        {
            std::lock_guard lock(mutex_);
            if (++finished_ == total_) done_.notify_all();
        }
    }
}

void WorkerPool::worker_loop() {
    std::size_t seen = 0;
    for (;;) {
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
        }
        drain();
    }
}

void WorkerPool::run(std::size_t tasks, const std::function<void(std::size_t)>& fn) {
    if (tasks == 0) return;
    if (workers_.empty() || tasks == 1) {
        for (std::size_t i = 0; i < tasks; ++i) fn(i);
        return;
    }
    {
        std::lock_guard lock(mutex_);
        job_ = &fn;
        next_ = 0;
        total_ = tasks;
        finished_ = 0;
        ++generation_;
    }
    wake_.notify_all();
    drain();
    std::unique_lock lock(mutex_);
    done_.wait(lock, [&] { return finished_ == total_; });
    job_ = nullptr;
}

}  // namespace heom
