#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace cgne {

/// Fixed set of worker threads that split index ranges into contiguous
/// chunks. parallel_for blocks until every chunk is done. With one worker
/// everything runs on the calling thread.
class WorkerPool {
 public:
  using RangeFn = std::function<void(std::size_t begin, std::size_t end)>;

  explicit WorkerPool(int workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return workers_; }
  void parallel_for(std::size_t n, const RangeFn& fn);

 private:
  void worker_loop(int id);

  int workers_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const RangeFn* job_ = nullptr;
  std::size_t job_n_ = 0;
  std::size_t generation_ = 0;
  int pending_ = 0;
  bool stop_ = false;
};

/// Resolves a requested worker count: values < 1 mean "use CGNE_WORKERS, else 1".
int resolve_workers(int requested);

}  // namespace cgne
