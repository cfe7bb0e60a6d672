#include "fou_sheet/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace fou {

int worker_count() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const int value = std::stoi(env);
      if (value >= 1) return value;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int workers) {
  if (n == 0) return;
  const std::size_t threads = std::min<std::size_t>(std::max(1, workers), n);
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t first) {
    for (std::size_t i = first; i < n; i += threads) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace fou
