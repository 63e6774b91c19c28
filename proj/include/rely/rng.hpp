// Deterministic random number generation.
//
// The core generator is std::mt19937_64, whose output sequence is fixed by
// the C++ standard, so runs are reproducible across platforms and compilers.
// All derived draws are implemented here explicitly (standard library
// distributions are NOT used because their algorithms are
// implementation-defined):
//
//   uniform01    53-bit mantissa draw in [0, 1)
//   normal_pair  trigonometric Box-Muller transform, two N(0,1) variates
//                from exactly two uniforms
//   index        Lemire multiply-shift bounded draw, floor(u * n / 2^64)
//
// Given a seed and a documented draw order these fully determine a sampled
// dataset, which is how simulation reruns stay byte-identical.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

namespace rely {

class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53 random mantissa bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1], safe as a log argument.
    double uniform01_open0() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Two independent N(0,1) draws from two uniforms (Box-Muller).
    std::pair<double, double> normal_pair() {
        double u1 = uniform01_open0();
        double u2 = uniform01();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform index in [0, n), Lemire multiply-shift.
    std::uint64_t index(std::uint64_t n) {
        unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<std::uint64_t>(wide >> 64);
    }

private:
    std::mt19937_64 gen_;
};

} // namespace rely
