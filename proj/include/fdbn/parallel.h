//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef FDBN_PARALLEL_H_
#define FDBN_PARALLEL_H_

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fdbn {

/// Fixed-size worker pool. parallel_for(n, fn) runs fn(0..n-1), each index
/// exactly once, and returns when all are done. Callers write results into
/// per-index slots, so the outcome does not depend on scheduling. If any
/// call throws, the exception of the lowest failing index is rethrown.
///
/// With threads <= 1 everything runs inline on the caller.
class ThreadPool {
public:
  explicit ThreadPool(int threads = 1);
  ~ThreadPool();

  ThreadPool(const ThreadPool &) = delete;
  ThreadPool &operator=(const ThreadPool &) = delete;

  int size() const { return static_cast<int>(workers_.size()); }

  void parallel_for(int n, const std::function<void(int)> &fn);

private:
  void worker_loop();
  void run_tasks();

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable start_cv_, done_cv_;

  // Current batch, guarded by mutex_.
  const std::function<void(int)> *fn_ = nullptr;
  int n_ = 0;
  int next_ = 0;
  int active_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
  std::vector<std::exception_ptr> errors_;
};

}  // namespace fdbn

#endif  // FDBN_PARALLEL_H_
