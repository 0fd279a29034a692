#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace das {

/// FNV-1a over raw bytes. Used to derive per-question RNG streams from a
/// master seed plus string tags, so episodes are independent of batch order.
uint64_t fnv1a(std::string_view bytes,
               uint64_t h = 14695981039346656037ull);

uint64_t hash_combine(uint64_t h, std::string_view tag);
uint64_t hash_combine(uint64_t h, uint64_t v);

/// splitmix64 generator. Chosen over std::mt19937 + std distributions because
/// the output sequence is fully pinned by this file on every platform; the
/// std distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64();

  /// Uniform in [0, 1): top 53 bits of one draw.
  double uniform01();

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  bool bernoulli(double p) { return uniform01() < p; }

  /// Fisher-Yates with uniform_index, deterministic across platforms.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

 private:
  uint64_t state_;
};

/// Independent stream keyed by (seed, name, salt, tag). Same key, same stream.
Rng derive_stream(uint64_t seed, std::string_view name, uint64_t salt = 0,
                  std::string_view tag = {});

}  // namespace das
