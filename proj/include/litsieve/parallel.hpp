#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace litsieve {

// Default worker count: LITSIEVE_WORKERS environment variable, else 1.
inline int default_workers() {
  if (const char* env = std::getenv("LITSIEVE_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// Runs f(chunk_index, begin, end) over [begin, end) split into fixed-size
// chunks.  The chunk partition depends only on the range (never on the worker
// count), and every chunk writes its own slot, so any merge done in chunk
// order is reproducible for every worker count.
template <class F>
inline int parallel_chunks(long begin, long end, int workers, long chunk_size, F&& f) {
  if (end <= begin) return 0;
  long n = end - begin;
  int nchunks = static_cast<int>((n + chunk_size - 1) / chunk_size);
  std::atomic<int> next{0};
  auto work = [&] {
    for (;;) {
      int c = next.fetch_add(1);
      if (c >= nchunks) break;
      long b = begin + static_cast<long>(c) * chunk_size;
      long e = std::min(end, b + chunk_size);
      f(c, b, e);
    }
  };
  workers = std::max(1, workers);
  std::vector<std::thread> pool;
  for (int i = 1; i < workers && i < nchunks; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return nchunks;
}

}  // namespace litsieve
