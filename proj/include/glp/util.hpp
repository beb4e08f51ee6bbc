#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace glp {

enum class ErrorKind { Usage, Data, Internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_data(const std::string& msg) { throw Error(ErrorKind::Data, msg); }
[[noreturn]] inline void fail_usage(const std::string& msg) { throw Error(ErrorKind::Usage, msg); }
[[noreturn]] inline void fail_internal(const std::string& msg) { throw Error(ErrorKind::Internal, msg); }

// ---- string helpers ----

std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& parts, const std::string& sep);
bool starts_with(std::string_view s, std::string_view prefix);
std::string strip(std::string_view s);

// ---- file helpers ----

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
bool file_exists(const std::string& path);
// Reads a text file line by line, tolerating a missing trailing newline.
std::vector<std::string> read_lines(const std::string& path);

// ---- hashing (FNV-1a 64, used for content hashes in stage manifests) ----

struct Fnv64 {
  uint64_t h = 1469598103934665603ULL;
  void update(const void* data, size_t n);
  void update(std::string_view s) { update(s.data(), s.size()); }
  uint64_t digest() const { return h; }
};

uint64_t fnv64(std::string_view s);
uint64_t fnv64_file(const std::string& path);
std::string hex64(uint64_t v);

// ---- deterministic RNG helpers ----
// std::mt19937_64 raw output is portable; the std distributions are not, so
// all sampling goes through these helpers.

using Rng = std::mt19937_64;

uint64_t mix_seed(uint64_t base, std::string_view salt);
uint64_t mix_seed(uint64_t base, uint64_t salt);

inline Rng make_rng(uint64_t seed) { return Rng(seed); }

inline double u01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * u01(rng); }

// Uniform integer in [0, n). n must be > 0.
inline uint64_t uniform_int(Rng& rng, uint64_t n) {
  // Rejection sampling to avoid modulo bias; deterministic for a given stream.
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

double normal(Rng& rng);  // Box-Muller, one value per call

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(uniform_int(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Draws an index from unnormalized nonnegative weights.
int sample_index(Rng& rng, const std::vector<double>& weights);

}  // namespace glp
