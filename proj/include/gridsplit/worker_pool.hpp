// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace gridsplit {

/// Fixed set of threads running index-parallel loops. The calling thread
/// takes part, and a caller waiting on its loop runs queued work from other
/// loops, so nested parallel_for calls cannot deadlock.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers = 1);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const { return threads_.size() + 1; }

  /// Runs fn(0..n-1) and returns when all calls finished. The first
  /// exception thrown by fn is rethrown here.
  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

 private:
  struct Batch;
  bool run_one(Batch& batch);
  std::shared_ptr<Batch> pending_locked();
  void worker_loop();

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::shared_ptr<Batch>> batches_;
  bool stop_ = false;
};

std::size_t default_worker_count();

}  // namespace gridsplit
