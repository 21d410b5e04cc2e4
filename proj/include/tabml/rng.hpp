#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace tabml {

/// Deterministic random source used for every shuffle, split and synthetic draw.
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are not (their algorithms are
/// implementation-defined), so all derived draws are implemented here:
///  - uniform01:     top 53 bits of one engine output, scaled to [0, 1)
///  - uniform_index: rejection sampling on the 64-bit output (no modulo bias)
///  - normal:        Box-Muller, one value per call (the pair's second half is discarded)
///
/// Given the same seed the sequence is identical on every conforming platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform01();

    /// Uniform integer in [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n);

    double normal(double mean, double stddev);

    /// Index drawn from a discrete distribution given by non-negative weights.
    std::size_t categorical(std::span<const double> weights);

    /// In-place Fisher-Yates shuffle (Durstenfeld variant, last to first).
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace tabml
