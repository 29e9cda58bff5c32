#include "caloric/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

namespace caloric {

namespace {
std::atomic<int> g_jobs{1};
}

void set_jobs(int j) {
  if (j < 1) throw std::invalid_argument("jobs must be >= 1");
  g_jobs = j;
}

int jobs() { return g_jobs; }

void for_rows(int rows, const std::function<void(int, int)>& fn) {
  const int j = std::min(g_jobs.load(), std::max(rows, 1));
  if (j <= 1) {
    fn(0, rows);
    return;
  }
  std::vector<std::thread> pool;
  const int band = (rows + j - 1) / j;
  for (int b = 0; b < j; ++b) {
    const int r0 = b * band, r1 = std::min(rows, r0 + band);
    if (r0 >= r1) break;
    pool.emplace_back([&fn, r0, r1] { fn(r0, r1); });
  }
  for (auto& t : pool) t.join();
}

double sum_rows(int rows, const std::function<double(int)>& row_value) {
  std::vector<double> partial(rows, 0.0);
  for_rows(rows, [&](int r0, int r1) {
    for (int r = r0; r < r1; ++r) partial[r] = row_value(r);
  });
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace caloric
