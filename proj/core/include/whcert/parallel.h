#pragma once

#include <functional>

namespace whcert {

// Worker count: WHCERT_THREADS if set and positive, else hardware
// concurrency, never below 1.
int ThreadCount();

// Calls fn(i) for i in [0, count) on up to ThreadCount() threads. Exceptions
// from workers are rethrown on the caller after all workers finish.
void ParallelFor(int count, const std::function<void(int)>& fn);

}  // namespace whcert
