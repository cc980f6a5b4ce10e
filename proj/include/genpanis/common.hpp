#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace genpanis {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic RNG used everywhere. Wraps mt19937_64 with explicitly
/// coded distributions so that streams depend only on the seed and the
/// call sequence, not on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

  double uniform() {
    // 53-bit mantissa uniform in [0,1)
    return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0);
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t uniform_u64() { return eng_(); }
  int uniform_int(int n) {  // in [0, n)
    return static_cast<int>(eng_() % static_cast<std::uint64_t>(n));
  }
  double normal();

  /// Derived stream for entry i of a batch job (seed XOR i convention).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t i) {
    // xor then mix, so that nearby indices decorrelate
    std::uint64_t x = seed ^ i;
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
  }

 private:
  std::mt19937_64 eng_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

/// FNV-1a over raw bytes; used for config/dataset/checkpoint identity stamps.
std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t hash_file(const std::filesystem::path& path);
std::string hash_hex(std::uint64_t h);

void ensure_dir(const std::filesystem::path& dir);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Static-chunked parallel loop. Results must be written to per-index slots;
/// chunk boundaries depend only on (n, workers), so any reduction done in
/// index order afterwards is deterministic.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

std::string format_double(double v, int precision = 6);

}  // namespace genpanis
