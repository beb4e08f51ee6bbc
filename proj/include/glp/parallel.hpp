#pragma once

#include <functional>
#include <vector>

namespace glp::par {

// Global worker count for all OpenMP kernels. 1 = serial (the
// bit-reproducibility mode); kernels are written so that results are
// identical for any thread count (fixed chunking, ordered reduction).
void set_threads(int n);
int threads();

// Runs fn(i) for i in [0, n) across the configured threads.
void for_each(int n, const std::function<void(int)>& fn);

// Chunked map-reduce with a reduction order independent of the thread
// count: chunks are fixed-size, computed in parallel, merged in index
// order.  merge(acc, part) must be associative over adjacent chunks.
template <class T, class MapFn, class MergeFn>
T chunk_reduce(int n, int chunk_size, T init, const MapFn& map_chunk, const MergeFn& merge) {
  if (n <= 0) return init;
  int nchunks = (n + chunk_size - 1) / chunk_size;
  std::vector<T> parts(static_cast<size_t>(nchunks));
  for_each(nchunks, [&](int c) {
    int lo = c * chunk_size;
    int hi = lo + chunk_size;
    if (hi > n) hi = n;
    parts[static_cast<size_t>(c)] = map_chunk(lo, hi);
  });
  T acc = std::move(init);
  for (int c = 0; c < nchunks; ++c) merge(acc, parts[static_cast<size_t>(c)]);
  return acc;
}

}  // namespace glp::par
