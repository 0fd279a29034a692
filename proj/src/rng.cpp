#include "das/rng.hpp"

namespace das {

uint64_t fnv1a(std::string_view bytes, uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t hash_combine(uint64_t h, std::string_view tag) {
  h = fnv1a(tag, h ^ 0x9e3779b97f4a7c15ull);
  return h;
}

uint64_t hash_combine(uint64_t h, uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  return fnv1a(std::string_view(buf, 8), h ^ 0x9e3779b97f4a7c15ull);
}

uint64_t Rng::next_u64() {
  // splitmix64, reference constants
  uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t Rng::uniform_index(std::size_t n) {
  // Rejection-free multiply-shift would bias for huge n; sizes here are tiny,
  // so 64-bit modulo of a fresh draw is fine and stays reproducible.
  return static_cast<std::size_t>(next_u64() % static_cast<uint64_t>(n));
}

Rng derive_stream(uint64_t seed, std::string_view name, uint64_t salt,
                  std::string_view tag) {
  uint64_t h = hash_combine(fnv1a("das.stream"), seed);
  h = hash_combine(h, name);
  h = hash_combine(h, salt);
  if (!tag.empty()) h = hash_combine(h, tag);
  return Rng(h);
}

}  // namespace das
