// SPDX-License-Identifier: Apache-2.0
#include "core/threading.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace smn {
namespace {

thread_local bool t_in_worker = false;

int default_thread_count() {
    if (const char* env = std::getenv("SMN_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// One parallel_for invocation. Chunk contents depend only on the chunk
// index, never on which thread claims it.
struct Task {
    std::size_t begin = 0, grain = 1, chunks = 0, total_end = 0;
    const std::function<void(std::size_t, std::size_t)>* body = nullptr;
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
};

class Pool {
public:
    static Pool& instance() {
        static Pool pool;
        return pool;
    }

    int threads() const { return threads_; }
    void set_threads(int n) { threads_ = std::max(1, n); }

    void run(std::size_t begin, std::size_t end, std::size_t grain,
             const std::function<void(std::size_t, std::size_t)>& body) {
        const std::size_t total = end - begin;
        const std::size_t chunks = (total + grain - 1) / grain;
        const int want = static_cast<int>(std::min<std::size_t>(threads_, chunks));
        if (want <= 1 || t_in_worker) {
            body(begin, end);
            return;
        }
        ensure_workers(want - 1);

        auto task = std::make_shared<Task>();
        task->begin = begin;
        task->total_end = end;
        task->grain = grain;
        task->chunks = chunks;
        task->body = &body;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            current_ = task;
            ++generation_;
        }
        cv_work_.notify_all();

        t_in_worker = true;  // nested parallel_for inside body runs inline
        drain(*task);
        t_in_worker = false;

        std::unique_lock<std::mutex> lock(mutex_);
        cv_done_.wait(lock, [&] { return task->done.load(std::memory_order_acquire) == task->chunks; });
        if (current_ == task) current_.reset();
    }

private:
    Pool() = default;
    ~Pool() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            stop_ = true;
            ++generation_;
        }
        cv_work_.notify_all();
        for (auto& w : workers_) w.join();
    }

    void ensure_workers(int n) {
        while (static_cast<int>(workers_.size()) < n) {
            workers_.emplace_back([this] { worker_main(); });
        }
    }

    void worker_main() {
        t_in_worker = true;
        std::uint64_t seen = 0;
        for (;;) {
            std::shared_ptr<Task> task;
            {
                std::unique_lock<std::mutex> lock(mutex_);
                cv_work_.wait(lock, [&] { return stop_ || generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                task = current_;
            }
            if (task) drain(*task);
        }
    }

    void drain(Task& task) {
        for (;;) {
            std::size_t c = task.next.fetch_add(1, std::memory_order_relaxed);
            if (c >= task.chunks) break;
            std::size_t lo = task.begin + c * task.grain;
            std::size_t hi = std::min(task.total_end, lo + task.grain);
            (*task.body)(lo, hi);
            if (task.done.fetch_add(1, std::memory_order_acq_rel) + 1 == task.chunks) {
                std::lock_guard<std::mutex> lock(mutex_);
                cv_done_.notify_all();
            }
        }
    }

    std::mutex mutex_;
    std::condition_variable cv_work_, cv_done_;
    std::vector<std::thread> workers_;
    std::shared_ptr<Task> current_;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
    int threads_ = default_thread_count();
};

}  // namespace

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body, std::size_t grain) {
    if (begin >= end) return;
    Pool::instance().run(begin, end, std::max<std::size_t>(1, grain), body);
}

int num_threads() { return Pool::instance().threads(); }

void set_num_threads(int n) { Pool::instance().set_threads(n); }

}  // namespace smn
