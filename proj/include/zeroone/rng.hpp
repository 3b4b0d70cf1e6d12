#pragma once

#include <array>
#include <cstdint>

namespace zeroone {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A generator is identified by (seed, stream); the 64-bit counter walks
/// through blocks of four 32-bit outputs. Two generators with the same
/// (seed, stream) produce identical sequences, and distinct streams are
/// statistically independent, so parallel producers stay reproducible.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    /// Raw block function; exposed for known-answer tests.
    static Block encrypt(Block counter, Key key) noexcept;

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the Box-Muller transform.
    double normal() noexcept;

    /// Uniform integer in [0, bound), bound > 0, without modulo bias.
    std::uint64_t below(std::uint64_t bound) noexcept;

private:
    Key key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    Block buffer_{};
    int used_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace zeroone
