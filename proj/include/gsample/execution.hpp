#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace gsample {

namespace detail {

// Fixed-size worker pool. run() blocks until every submitted index has been
// processed; that join is the stage barrier between two transformations.
class thread_pool {
 public:
  explicit thread_pool(std::size_t workers) {
    threads_.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) {
      threads_.emplace_back([this] { worker_loop(); });
    }
  }

  thread_pool(const thread_pool&) = delete;
  thread_pool& operator=(const thread_pool&) = delete;

  ~thread_pool() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
  }

  std::size_t size() const noexcept { return threads_.size(); }

  void run(std::size_t count, const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    batch b{count, &body};
    {
      std::lock_guard lock(mutex_);
      for (std::size_t i = 0; i < count; ++i) queue_.push_back({&b, i});
    }
    wake_.notify_all();

    // The caller helps drain the queue instead of idling.
    while (true) {
      task t;
      {
        std::lock_guard lock(mutex_);
        if (queue_.empty()) break;
        t = queue_.front();
        queue_.pop_front();
      }
      execute(t);
    }

    std::unique_lock lock(b.mutex);
    b.done_cv.wait(lock, [&] { return b.remaining == 0; });
    if (b.error) std::rethrow_exception(b.error);
  }

 private:
  struct batch {
    std::size_t remaining;
    const std::function<void(std::size_t)>* body;
    std::mutex mutex;
    std::condition_variable done_cv;
    std::exception_ptr error;

    batch(std::size_t n, const std::function<void(std::size_t)>* f) : remaining(n), body(f) {}
  };

  struct task {
    batch* owner = nullptr;
    std::size_t index = 0;
  };

  static void execute(const task& t) {
    std::exception_ptr err;
    try {
      (*t.owner->body)(t.index);
    } catch (...) {
      err = std::current_exception();
    }
    std::lock_guard lock(t.owner->mutex);
    if (err && !t.owner->error) t.owner->error = err;
    if (--t.owner->remaining == 0) t.owner->done_cv.notify_all();
  }

  void worker_loop() {
    while (true) {
      task t;
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        t = queue_.front();
        queue_.pop_front();
      }
      execute(t);
    }
  }

  std::vector<std::thread> threads_;
  std::deque<task> queue_;
  std::mutex mutex_;
  std::condition_variable wake_;
  bool stopping_ = false;
};

}  // namespace detail

// Job environment: degree of parallelism plus the master seed from which all
// randomized operators derive their draws. Copies share one worker pool.
class execution_context {
 public:
  explicit execution_context(std::size_t parallelism = 1, std::uint64_t master_seed = 0)
      : parallelism_(parallelism), seed_(master_seed) {
    if (parallelism == 0) throw parameter_error("parallelism must be at least 1");
    // The calling thread participates, so P partitions need P - 1 workers.
    if (parallelism > 1) pool_ = std::make_shared<detail::thread_pool>(parallelism - 1);
  }

  std::size_t parallelism() const noexcept { return parallelism_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // Same worker pool, different master seed.
  execution_context with_seed(std::uint64_t seed) const {
    execution_context copy = *this;
    copy.seed_ = seed;
    return copy;
  }

  // Invokes body(i) for every i in [0, count) concurrently and returns once
  // all invocations finished. The first exception thrown is rethrown.
  template <class Body>
  void parallel_for(std::size_t count, Body&& body) const {
    if (!pool_ || count <= 1) {
      for (std::size_t i = 0; i < count; ++i) body(i);
      return;
    }
    const std::function<void(std::size_t)> fn = std::ref(body);
    pool_->run(count, fn);
  }

 private:
  std::size_t parallelism_;
  std::uint64_t seed_;
  std::shared_ptr<detail::thread_pool> pool_;
};

}  // namespace gsample
