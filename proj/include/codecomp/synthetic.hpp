#pragma once

#include <cstdint>

#include "codecomp/codec.hpp"

namespace codecomp {

/// Embeddings that are exact compositional sums plus isotropic noise.
struct CompositionalData {
    EmbeddingMatrix emb;
    CodeMatrix codes;   // ground-truth codes
    Codebooks books;    // ground-truth codebooks
};

/// Codebook entries Uniform(−1, 1), codes uniform over [0, K), embedding
/// row w = compose(codes[w]) + N(0, sigma²) per entry. Words are "w0", "w1", ...
CompositionalData make_compositional_data(std::uint32_t M, std::uint32_t K, std::uint32_t H,
                                          std::size_t vocab_size, double sigma, std::uint64_t seed);

} // namespace codecomp
