#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include "codecomp/errors.hpp"

namespace codecomp {

inline bool is_power_of_two(std::uint64_t x) { return std::has_single_bit(x); }

/// log₂ of a power of two.
inline unsigned exact_log2(std::uint64_t x) {
    return static_cast<unsigned>(std::countr_zero(x));
}

/// An M×K coding scheme over H-dimensional embeddings: M codebooks of K
/// codewords each, softmax temperature tau.
struct SchemeConfig {
    std::uint32_t M = 0;
    std::uint32_t K = 0;
    std::uint32_t H = 0;
    double tau = 1.0;

    /// Total codewords across all codebooks (rows of the combined codebook).
    std::uint32_t num_codewords() const { return M * K; }
    /// Encoder hidden width, M·K/2.
    std::uint32_t hidden() const { return M * K / 2; }
    unsigned bits_per_component() const { return exact_log2(K); }
    std::uint64_t bits_per_code() const {
        return static_cast<std::uint64_t>(M) * bits_per_component();
    }

    /// Throws ConfigError unless M ≥ 1, K ≥ 2 a power of two, H ≥ 1, tau > 0.
    void validate() const {
        if (M < 1) throw ConfigError("scheme: M must be >= 1");
        if (K < 2 || !is_power_of_two(K)) {
            throw ConfigError("scheme: K must be a power of two >= 2, got " + std::to_string(K));
        }
        if (H < 1) throw ConfigError("scheme: H must be >= 1");
        if (!(tau > 0.0)) throw ConfigError("scheme: tau must be > 0");
        // K ≥ 2 and a power of two, so M·K is always even.
    }
};

} // namespace codecomp
