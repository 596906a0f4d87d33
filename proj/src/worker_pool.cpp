// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridsplit/worker_pool.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>

namespace gridsplit {

struct WorkerPool::Batch {
  const std::function<void(std::size_t)>* fn = nullptr;
  std::size_t n = 0;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex error_mutex;
  std::exception_ptr error;
};

WorkerPool::WorkerPool(std::size_t workers) {
  if (workers < 1) workers = 1;
  for (std::size_t i = 1; i < workers; ++i) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

bool WorkerPool::run_one(Batch& batch) {
  std::size_t i = batch.next.fetch_add(1);
  if (i >= batch.n) return false;
  try {
    (*batch.fn)(i);
  } catch (...) {
    std::lock_guard<std::mutex> lock(batch.error_mutex);
    if (!batch.error) batch.error = std::current_exception();
  }
  if (batch.done.fetch_add(1) + 1 == batch.n) {
    std::lock_guard<std::mutex> lock(mutex_);
    cv_.notify_all();
  }
  return true;
}

std::shared_ptr<WorkerPool::Batch> WorkerPool::pending_locked() {
  for (const auto& b : batches_)
    if (b->next.load() < b->n) return b;
  return nullptr;
}

void WorkerPool::worker_loop() {
  for (;;) {
    std::shared_ptr<Batch> batch;
    {
      std::unique_lock<std::mutex> lock(mutex_);
      cv_.wait(lock, [&] { return stop_ || (batch = pending_locked()) != nullptr; });
      if (stop_ && !batch) return;
    }
    while (run_one(*batch)) {
    }
  }
}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (threads_.empty() || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  auto batch = std::make_shared<Batch>();
  batch->fn = &fn;
  batch->n = n;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    batches_.push_back(batch);
  }
  cv_.notify_all();
  while (run_one(*batch)) {
  }
  for (;;) {
    std::shared_ptr<Batch> other;
    {
      std::unique_lock<std::mutex> lock(mutex_);
      cv_.wait(lock, [&] { return batch->done.load() == n || (other = pending_locked()) != nullptr; });
      if (batch->done.load() == n) {
        batches_.erase(std::find(batches_.begin(), batches_.end(), batch));
        break;
      }
    }
    while (run_one(*other)) {
    }
  }
  if (batch->error) std::rethrow_exception(batch->error);
}

std::size_t default_worker_count() {
  if (const char* env = std::getenv("GRIDSPLIT_WORKERS")) {
    try {
      long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return 1;
}

}  // namespace gridsplit
