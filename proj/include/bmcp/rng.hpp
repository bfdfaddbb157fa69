#ifndef BMCP_RNG_HPP
#define BMCP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace bmcp {

/// SplitMix64 finalizer; used to derive independent stream seeds from a
/// master seed and an index. Stable across versions: changing this mapping
/// would silently change every seeded result.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Random stream owned by exactly one chain or worker at a time.
/// All distribution samplers are implemented here (not via std::
/// distributions) so that a given seed yields the same draw sequence
/// everywhere this library builds.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    static RngStream derive(std::uint64_t seed, std::uint64_t index) {
        return RngStream(seed ^ splitmix64(index + 1));
    }

    std::uint64_t raw() { return gen_(); }

    /// Uniform on [0,1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0,1); never returns an endpoint.
    double uniform_pos() {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return u;
    }

    /// One standard Normal draw (Box-Muller, no cached spare).
    double normal_std() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal_std(); }

    /// Gamma(shape, rate) with density proportional to g^{shape-1} e^{-rate g}.
    /// Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
    double gamma(double shape, double rate) {
        if (!(shape > 0.0) || !(rate > 0.0))
            throw std::invalid_argument("gamma: shape and rate must be positive");
        if (shape < 1.0) {
            const double u = uniform_pos();
            return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal_std();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
        }
    }

    double beta(double a, double b) {
        const double g1 = gamma(a, 1.0);
        const double g2 = gamma(b, 1.0);
        const double s = g1 + g2;
        if (s <= 0.0) return 0.5;
        return g1 / s;
    }

    /// Inverse-Gamma(shape, scale) with density proportional to
    /// y^{-(shape+1)} e^{-scale/y}.
    double inv_gamma(double shape, double scale) {
        return 1.0 / gamma(shape, scale);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 gen_;
};

} // namespace bmcp

#endif
