// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace avguard {

int worker_count() {
  static const int cached = [] {
    if (const char* env = std::getenv("AVGUARD_NUM_WORKERS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
  }();
  return cached;
}

namespace {

// Persistent pool: worker threads sleep between parallel_for calls. The
// caller participates in the work, so one task at a time and no nesting.
class Pool {
 public:
  explicit Pool(int workers) : helper_count_(workers - 1) {
    for (int i = 0; i < helper_count_; ++i)
      threads_.emplace_back([this] { helper_loop(); });
  }

  ~Pool() {
    {
      std::lock_guard<std::mutex> lock(m_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void run(int64_t n, const std::function<void(int64_t)>& fn) {
    {
      std::lock_guard<std::mutex> lock(m_);
      task_ = &fn;
      n_ = n;
      next_.store(0, std::memory_order_relaxed);
      remaining_ = helper_count_;
      ++epoch_;
    }
    cv_.notify_all();
    work();
    std::unique_lock<std::mutex> lock(m_);
    done_cv_.wait(lock, [this] { return remaining_ == 0; });
    task_ = nullptr;
  }

 private:
  void work() {
    while (true) {
      int64_t i = next_.fetch_add(1, std::memory_order_relaxed);
      if (i >= n_) break;
      (*task_)(i);
    }
  }

  void helper_loop() {
    uint64_t seen = 0;
    while (true) {
      std::unique_lock<std::mutex> lock(m_);
      cv_.wait(lock, [&] { return stop_ || epoch_ != seen; });
      if (stop_) return;
      seen = epoch_;
      lock.unlock();
      work();
      lock.lock();
      if (--remaining_ == 0) done_cv_.notify_one();
    }
  }

  int helper_count_;
  std::vector<std::thread> threads_;
  std::mutex m_;
  std::condition_variable cv_, done_cv_;
  const std::function<void(int64_t)>* task_ = nullptr;
  std::atomic<int64_t> next_{0};
  int64_t n_ = 0;
  int remaining_ = 0;
  uint64_t epoch_ = 0;
  bool stop_ = false;
};

}  // namespace

void parallel_for(int64_t n, const std::function<void(int64_t)>& fn) {
  if (n <= 0) return;
  int workers = worker_count();
  if (workers <= 1 || n == 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  static Pool pool(worker_count());
  pool.run(n, fn);
}

}  // namespace avguard
