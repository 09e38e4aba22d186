#include "cgne/parallel.hpp"

#include <cstdlib>
#include <string>

namespace cgne {
namespace {

std::pair<std::size_t, std::size_t> chunk(std::size_t n, int parts, int k) {
  const std::size_t base = n / parts, extra = n % parts;
  const std::size_t uk = static_cast<std::size_t>(k);
  const std::size_t begin = uk * base + std::min(uk, extra);
  return {begin, begin + base + (uk < extra ? 1 : 0)};
}

}  // namespace

WorkerPool::WorkerPool(int workers) : workers_(workers < 1 ? 1 : workers) {
  for (int id = 1; id < workers_; ++id) threads_.emplace_back([this, id] { worker_loop(id); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::parallel_for(std::size_t n, const RangeFn& fn) {
  if (workers_ == 1 || n < static_cast<std::size_t>(workers_)) {
    fn(0, n);
    return;
  }
  {
    std::lock_guard lock(mu_);
    job_ = &fn;
    job_n_ = n;
    pending_ = workers_ - 1;
    ++generation_;
  }
  start_cv_.notify_all();
  const auto [b, e] = chunk(n, workers_, 0);
  fn(b, e);
  std::unique_lock lock(mu_);
  done_cv_.wait(lock, [this] { return pending_ == 0; });
  job_ = nullptr;
}

void WorkerPool::worker_loop(int id) {
  std::size_t seen = 0;
  for (;;) {
    const RangeFn* job;
    std::size_t n;
    {
      std::unique_lock lock(mu_);
      start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      job = job_;
      n = job_n_;
    }
    const auto [b, e] = chunk(n, workers_, id);
    (*job)(b, e);
    {
      std::lock_guard lock(mu_);
      --pending_;
    }
    done_cv_.notify_one();
  }
}

int resolve_workers(int requested) {
  if (requested >= 1) return requested;
  if (const char* env = std::getenv("CGNE_WORKERS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

}  // namespace cgne
