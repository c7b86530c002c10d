//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fdbn/parallel.h"

#include <exception>

namespace fdbn {

ThreadPool::ThreadPool(int threads) {
  if (threads <= 1)
    return;
  workers_.reserve(threads);
  for (int i = 0; i < threads; ++i)
    workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto &t: workers_)
    t.join();
}

void ThreadPool::run_tasks() {
  std::unique_lock lock(mutex_);
  while (next_ < n_) {
    const int i = next_++;
    const auto *fn = fn_;
    lock.unlock();
    std::exception_ptr err;
    try {
      (*fn)(i);
    } catch (...) {
      err = std::current_exception();
    }
    lock.lock();
    if (err)
      errors_[i] = err;
  }
}

void ThreadPool::worker_loop() {
  std::size_t seen = 0;
  std::unique_lock lock(mutex_);
  for (;;) {
    start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
    if (stop_)
      return;
    seen = generation_;
    ++active_;
    lock.unlock();
    run_tasks();
    lock.lock();
    if (--active_ == 0 && next_ >= n_)
      done_cv_.notify_all();
  }
}

void ThreadPool::parallel_for(int n, const std::function<void(int)> &fn) {
  if (n <= 0)
    return;
  if (workers_.empty()) {
    for (int i = 0; i < n; ++i)
      fn(i);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    fn_ = &fn;
    n_ = n;
    next_ = 0;
    errors_.assign(n, nullptr);
    ++generation_;
  }
  start_cv_.notify_all();
  std::unique_lock lock(mutex_);
  done_cv_.wait(lock, [&] { return next_ >= n_ && active_ == 0; });
  fn_ = nullptr;
  for (auto &e: errors_)
    if (e)
      std::rethrow_exception(e);
}

}  // namespace fdbn
