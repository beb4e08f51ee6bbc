#include "glp/parallel.hpp"

#include <omp.h>

#include <atomic>

namespace glp::par {

namespace {
std::atomic<int> g_threads{1};
}

void set_threads(int n) {
  if (n < 1) n = 1;
  g_threads.store(n);
}

int threads() { return g_threads.load(); }

void for_each(int n, const std::function<void(int)>& fn) {
  int t = threads();
  if (t <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#pragma omp parallel for schedule(dynamic, 1) num_threads(t)
  for (int i = 0; i < n; ++i) fn(i);
}

}  // namespace glp::par
