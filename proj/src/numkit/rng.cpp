#include "pfedsop/numkit/rng.hpp"

#include <numeric>

#include "pfedsop/error.hpp"

namespace pfedsop::numkit {

std::uint64_t mix64(std::uint64_t x) noexcept {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, const StreamKey& key) noexcept {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ static_cast<std::uint64_t>(key.domain));
  h = mix64(h ^ key.entity);
  h = mix64(h ^ key.round);
  return h;
}

std::vector<double> dirichlet_draw(double alpha, std::size_t k, RngStream& rng) {
  if (!(alpha > 0.0)) throw ParameterError("dirichlet_draw: alpha must be > 0");
  if (k == 0) throw ParameterError("dirichlet_draw: k must be >= 1");
  std::vector<double> p(k);
  for (auto& v : p) v = rng.gamma(alpha);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(total > 0.0)) {
    // Every Gamma draw underflowed (possible for tiny alpha); the limit of
    // the normalized vector is a vertex of the simplex.
    std::fill(p.begin(), p.end(), 0.0);
    p[rng.index(k)] = 1.0;
    return p;
  }
  for (auto& v : p) v /= total;
  return p;
}

}  // namespace pfedsop::numkit
