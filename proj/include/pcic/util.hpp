#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace pcic {

/// FNV-1a 64-bit. Used for fold assignment and train/validation splits so
/// partitions are stable across platforms and input orderings.
std::uint64_t fnv1a64(std::string_view text);

/// splitmix64 finalizer; combines seeds deterministically.
std::uint64_t mix64(std::uint64_t x);

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    return mix64(seed ^ mix64(salt));
}

/// Shortest round-trip decimal rendering of a double (via std::to_chars).
std::string format_double(double value);

/// Strict double parse of an entire field.
bool parse_double(std::string_view text, double& out);
bool parse_int64(std::string_view text, std::int64_t& out);

/// Runs fn(i) for i in [0, count) across at most `threads` workers
/// (0 = hardware concurrency). Chunked contiguously; fn must only touch
/// per-index state.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// Deterministic splitmix64 stream. The increment-then-finalize structure
/// gives identical sequences for a given seed regardless of platform word
/// order or library versions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    double uniform();                  // [0, 1)
    std::size_t below(std::size_t n);  // [0, n)
    double exponential(double mean);
    double normal();  // standard normal via Box-Muller, uncached
    double gamma(double shape, double scale);
    int poisson(double mean);

  private:
    std::uint64_t state_;
};

/// In-place Fisher-Yates driven by the stream above.
void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng);

}  // namespace pcic
