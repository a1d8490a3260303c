#include "codecomp/synthetic.hpp"

namespace codecomp {

CompositionalData make_compositional_data(std::uint32_t M, std::uint32_t K, std::uint32_t H,
                                          std::size_t vocab_size, double sigma, std::uint64_t seed) {
    if (M < 1 || K < 1 || !is_power_of_two(K) || H < 1) {
        throw ConfigError("synthetic: invalid scheme");
    }
    if (sigma < 0.0) throw ConfigError("synthetic: sigma must be >= 0");
    Rng rng(seed);
    CompositionalData out;
    out.books = Codebooks{M, K, uniform_matrix(rng, static_cast<Eigen::Index>(M) * K, H, 1.0)};

    const auto V = static_cast<Eigen::Index>(vocab_size);
    CodeRows codes(V, M);
    for (Eigen::Index w = 0; w < V; ++w) {
        for (std::uint32_t i = 0; i < M; ++i) codes(w, i) = static_cast<std::uint32_t>(rng.below(K));
    }
    out.codes = CodeMatrix(M, K, std::move(codes));

    std::vector<std::string> vocab;
    vocab.reserve(vocab_size);
    for (std::size_t w = 0; w < vocab_size; ++w) vocab.push_back("w" + std::to_string(w));
    out.emb = reconstruct_all(out.codes, out.books, vocab);
    for (Eigen::Index w = 0; w < V; ++w) {
        for (Eigen::Index c = 0; c < out.emb.matrix.cols(); ++c) {
            out.emb.matrix(w, c) += static_cast<float>(sigma * rng.normal());
        }
    }
    return out;
}

} // namespace codecomp
