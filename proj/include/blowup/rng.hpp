#ifndef BLOWUP_RNG_HPP
#define BLOWUP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace blowup
{

// Counter-based generator: draw i from stream `seed` is splitmix64(seed, i).
// Any draw is reproducible from (seed, counter) alone, which is what the
// manifests record.
class CounterRng
{
  public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) noexcept
        : seed_(seed), counter_(counter)
    {
    }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept
    {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() noexcept
    {
        return mix(mix(seed_) ^ (counter_++ * 0xd1b54a32d192ed03ULL));
    }

    /// Uniform on [0,1).
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (consumes two draws).
    double normal() noexcept
    {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

} // namespace blowup

#endif
