#pragma once

#include <cstddef>
#include <functional>

namespace temviro {

// Worker count from TEMVIRO_THREADS. 0 means single-threaded deterministic
// mode; unset means hardware concurrency. Per-item work dispatched through
// parallel_for must not depend on which worker runs it.
int worker_count();

// Overrides the environment for the rest of the process (tests, CLI flags).
void set_worker_count(int n);

// Runs body(i) for i in [0, n). Serial when worker_count() <= 1.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Keeps large freed blocks in the heap instead of returning them to the OS,
// so per-batch activations stop paying for fresh page faults. Process-wide;
// executables call it once at startup. No-op outside glibc.
void tune_allocator();

}  // namespace temviro
