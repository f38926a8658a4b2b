#include "finsler/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace finsler {

int resolve_threads(int requested) {
  if (const char* env = std::getenv("FINSLER_THREADS")) {
    try {
      const int value = std::stoi(env);
      if (value > 0) return value;
    } catch (const std::exception&) {
    }
  }
  return std::max(requested, 1);
}

void parallel_for(Index n, int threads, const std::function<void(Index, Index)>& body) {
  if (n <= 0) return;
  const Index workers = std::min<Index>(std::max(threads, 1), n);
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  const Index block = (n + workers - 1) / workers;
  for (Index w = 1; w < workers; ++w) {
    const Index begin = w * block;
    const Index end = std::min(n, begin + block);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(0, std::min(n, block));
  for (auto& t : pool) t.join();
}

}  // namespace finsler
