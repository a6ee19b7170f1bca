#include "temviro/parallel.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <atomic>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace temviro {
namespace {

int env_worker_count() {
  const char* env = std::getenv("TEMVIRO_THREADS");
  if (env == nullptr || *env == '\0') {
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  try {
    return std::max(0, std::stoi(env));
  } catch (...) {
    return 0;
  }
}

std::atomic<int>& configured() {
  static std::atomic<int> n{env_worker_count()};
  return n;
}

struct Arena {
  std::mutex mu;
  int size = -1;
  std::unique_ptr<tbb::task_arena> arena;

  tbb::task_arena& get(int n) {
    std::lock_guard lock(mu);
    if (size != n) {
      arena = std::make_unique<tbb::task_arena>(n);
      size = n;
    }
    return *arena;
  }
};

Arena& arena() {
  static Arena a;
  return a;
}

}  // namespace

int worker_count() { return configured().load(); }

void set_worker_count(int n) { configured().store(std::max(0, n)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const int workers = worker_count();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  arena().get(workers).execute([&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n),
                      [&](const tbb::blocked_range<std::size_t>& r) {
                        for (std::size_t i = r.begin(); i != r.end(); ++i) body(i);
                      });
  });
}

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace temviro
