#include "pushbroom/parallel.hpp"

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace pushbroom {

namespace {
std::atomic<int> g_thread_count{0};
}

void set_thread_count(int n) { g_thread_count.store(n < 0 ? 0 : n); }

int thread_count() {
  const int n = g_thread_count.load();
  if (n > 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int begin, int end, const std::function<void(int)>& body) {
  const int range = end - begin;
  if (range <= 0) return;
  const int workers = std::min(thread_count(), range);
  if (workers <= 1 || range < 4) {
    for (int i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  for (int t = 0; t < workers; ++t) {
    const int lo = begin + static_cast<int>(static_cast<long long>(range) * t / workers);
    const int hi = begin + static_cast<int>(static_cast<long long>(range) * (t + 1) / workers);
    pool.emplace_back([&, lo, hi]() {
      try {
        for (int i = lo; i < hi; ++i) body(i);
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pushbroom
