// worker_pool.hpp: fixed-size pool for fan-out of per-index work

#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace heom {

// run(n, fn) calls fn(i) for i in [0, n) across the workers and the calling
// thread, and returns when all calls have finished. Not reentrant.
class WorkerPool {
public:
    explicit WorkerPool(unsigned threads);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    unsigned size() const noexcept { return static_cast<unsigned>(workers_.size()) + 1; }

    void run(std::size_t tasks, const std::function<void(std::size_t)>& fn);

    // HEOM_THREADS if set, otherwise hardware concurrency (at least 1).
    static unsigned default_threads();

private:
    void worker_loop();
    void drain();

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(std::size_t)>* job_{nullptr};
    std::size_t next_{0};
    std::size_t total_{0};
    std::size_t finished_{0};
    std::size_t generation_{0};
    bool stop_{false};
};

}  // namespace heom
