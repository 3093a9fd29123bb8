#ifndef SYSID_RNG_HPP
#define SYSID_RNG_HPP

#include <cstdint>

namespace sysid {

/// Counter-based generator (splitmix64). Every stochastic operation in the
/// library takes an explicit 64-bit seed; substreams are derived with
/// derive_seed so independent tasks never share state.
///
/// Gaussian variates use the inverse-CDF transform (Acklam's rational
/// approximation plus one Halley refinement), so a given seed yields the
/// same sequence on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on (0, 1); never returns an endpoint.
    double next_uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53 * (1.0 - 0x1.0p-54);
    }

    /// Standard normal via inverse CDF.
    double next_gaussian();

  private:
    std::uint64_t state_;
};

/// Mixes a base seed with task coordinates into an independent substream
/// seed (e.g. seed per rollout, per trial, per grid cell).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Quantile of the standard normal distribution, u in (0, 1).
double inverse_normal_cdf(double u);

} // namespace sysid

#endif
