#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pfedsop::numkit {

/// What a random stream is used for. Part of the stream key so that, e.g.,
/// client 3's SGD shuffling in round 7 never shares draws with its
/// fine-tuning pass in the same round.
enum class StreamDomain : std::uint64_t {
  kServer = 1,      // client sampling
  kClientSgd = 2,   // local SGD batch order
  kFineTune = 3,    // FT baselines
  kPartition = 4,   // partitioners
  kSplit = 5,       // train/test split
  kInit = 6,        // model initialization
  kSynthesis = 7,   // synthetic datasets
  kTest = 8,        // free for tests and oracles
};

struct StreamKey {
  StreamDomain domain = StreamDomain::kTest;
  std::uint64_t entity = 0;  // client id, or 0 for server-level streams
  std::uint64_t round = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// 64-bit finalizer used to derive engine seeds from (seed, key).
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t master_seed, const StreamKey& key) noexcept;

/// Deterministic random stream keyed by (master seed, stream key). Two
/// streams built from the same pair produce identical sequences regardless
/// of what other streams exist or in which order they are drawn from.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, StreamKey key)
      : engine_(derive_seed(master_seed, key)) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    std::shuffle(items.begin(), items.end(), engine_);
  }
  template <typename T>
  void shuffle(std::vector<T>& items) {
    std::shuffle(items.begin(), items.end(), engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Probability vector of length k drawn from Dir(alpha * 1_k) as normalized
/// Gamma(alpha, 1) variates. Throws ParameterError for alpha <= 0 or k == 0.
std::vector<double> dirichlet_draw(double alpha, std::size_t k, RngStream& rng);

}  // namespace pfedsop::numkit
