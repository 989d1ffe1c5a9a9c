// Seeded RNG with hand-rolled sampling so runs are bit-reproducible across
// standard library implementations (std distributions are not portable).
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace sigvae {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller without caching the spare, keeping the draw count predictable.
    double gaussian(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Index in [0, n).
    std::size_t index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("Rng::index: empty range");
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    // Sample from unnormalized non-negative weights by inverse CDF.
    std::size_t categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("Rng::categorical: weights sum to zero");
        double u = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
        return weights.size() - 1;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace sigvae
