#include "nlpb/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nlpb {

namespace {
std::atomic<int> g_threads{1};
constexpr std::size_t kMinParallelWork = std::size_t{1} << 16;
}  // namespace

void set_num_threads(int n) { g_threads.store(std::max(1, n)); }
int num_threads() { return g_threads.load(); }

void parallel_for(std::size_t n, std::size_t work,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  const auto threads = static_cast<std::size_t>(num_threads());
  if (threads <= 1 || n < 2 || work < kMinParallelWork) {
    body(0, n);
    return;
  }
  const std::size_t chunks = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(chunks - 1);
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&](std::size_t c) {
    const std::size_t b = n * c / chunks;
    const std::size_t e = n * (c + 1) / chunks;
    try {
      body(b, e);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  for (std::size_t c = 1; c < chunks; ++c) pool.emplace_back(run, c);
  run(0);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void parallel_tasks(std::size_t n, const std::function<void(std::size_t)>& task) {
  const auto threads = static_cast<std::size_t>(num_threads());
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace nlpb
