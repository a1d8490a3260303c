#include <map>

#include <gtest/gtest.h>

#include "codecomp/analysis.hpp"
#include "codecomp/synthetic.hpp"

using namespace codecomp;

namespace {

CodeMatrix codes_from(std::uint32_t M, std::uint32_t K, std::initializer_list<std::initializer_list<std::uint32_t>> rows) {
    CodeRows c(static_cast<Eigen::Index>(rows.size()), M);
    Eigen::Index w = 0;
    for (const auto& r : rows) {
        Eigen::Index i = 0;
        for (auto v : r) c(w, i++) = v;
        ++w;
    }
    return CodeMatrix(M, K, std::move(c));
}

CodeMatrix random_codes(std::uint32_t M, std::uint32_t K, std::size_t V, Rng& rng) {
    CodeRows c(static_cast<Eigen::Index>(V), M);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = static_cast<std::uint32_t>(rng.below(K));
    return CodeMatrix(M, K, std::move(c));
}

EmbeddingMatrix gaussian(std::size_t V, Eigen::Index H, std::uint64_t seed) {
    Rng rng(seed);
    EmbeddingMatrix e;
    e.matrix.resize(static_cast<Eigen::Index>(V), H);
    for (Eigen::Index i = 0; i < e.matrix.size(); ++i) e.matrix.data()[i] = static_cast<float>(rng.normal());
    for (std::size_t w = 0; w < V; ++w) e.vocab.push_back("g" + std::to_string(w));
    return e;
}

} // namespace

// ---------------------------------------------------------------- size

TEST(Size, CodeLengthsOfStandardSchemes) {
    EXPECT_EQ(size_report({8, 64, 300}, 75102).code_bits_per_word, 48u);
    EXPECT_EQ(size_report({16, 32, 300}, 75102).code_bits_per_word, 80u);
    EXPECT_EQ(size_report({32, 16, 300}, 75102).code_bits_per_word, 128u);
    EXPECT_EQ(size_report({64, 8, 300}, 75102).code_bits_per_word, 192u);
}

TEST(Size, ByteCounts) {
    const auto s = size_report({32, 16, 300}, 75102);
    EXPECT_EQ(s.code_bytes_exact, 1201632u);  // 75102 · 128 / 8
    EXPECT_EQ(s.code_bytes_aligned, 1201632u);
    EXPECT_EQ(s.num_vectors, 512u);
    EXPECT_EQ(s.vector_bytes, 512u * 300u * 4u);
    EXPECT_EQ(s.baseline_bytes, 75102u * 300u * 4u);
    EXPECT_EQ(s.total_bytes_exact, s.code_bytes_exact + s.vector_bytes);
    EXPECT_DOUBLE_EQ(s.compression_ratio, double(s.baseline_bytes) / double(s.total_bytes_exact));
}

TEST(Size, BinaryEquivalent) {
    // N = 512 basis vectors as a binary code take 256 bits; 32×16 needs only 128.
    const auto s = size_report({32, 16, 300}, 1);
    EXPECT_EQ(s.binary_code_bits, 256u);
    EXPECT_EQ(s.code_bits_per_word * 2, s.binary_code_bits);
}

TEST(Size, SmallestScheme) {
    const auto s = size_report({1, 2, 4}, 10);
    EXPECT_EQ(s.code_bits_per_word, 1u);
    EXPECT_EQ(s.code_bytes_exact, 2u);    // 10 bits
    EXPECT_EQ(s.code_bytes_aligned, 10u); // one byte each
    EXPECT_EQ(size_report({3, 4, 4}, 4).code_bytes_exact, 3u);  // 24 bits
    EXPECT_EQ(size_report({3, 4, 4}, 5).code_bytes_exact, 4u);  // 30 bits
}

TEST(Size, ReportHasKeys) {
    const auto r = to_report(size_report({16, 32, 300}, 75102));
    EXPECT_EQ(r.get("code_bits_per_word"), "80");
    EXPECT_NE(r.tsv().find("code_bits_per_word\t80\n"), std::string::npos);
}

// ---------------------------------------------------------------- balance

TEST(Balance, IdenticalCodes) {
    const auto t = balance_table(codes_from(2, 4, {{1, 3}, {1, 3}, {1, 3}}));
    EXPECT_EQ(t.counts(0, 1), 3u);
    EXPECT_EQ(t.counts(1, 3), 3u);
    EXPECT_EQ(t.min_count, 0u);
    EXPECT_EQ(t.max_count, 3u);
    EXPECT_EQ(t.dead_codewords, 6u);
    EXPECT_DOUBLE_EQ(t.entropy_bits[0], 0.0);
    EXPECT_EQ(to_csv(t), "0,3,0,0\n0,0,0,3\n");
}

TEST(Balance, UniformCycling) {
    CodeRows c(16, 2);
    for (int w = 0; w < 16; ++w) {
        c(w, 0) = w % 4;
        c(w, 1) = (w / 4) % 4;
    }
    const auto t = balance_table(CodeMatrix(2, 4, c));
    EXPECT_EQ(t.min_count, 4u);
    EXPECT_EQ(t.max_count, 4u);
    EXPECT_EQ(t.dead_codewords, 0u);
    EXPECT_DOUBLE_EQ(t.entropy_bits[0], 2.0);
    EXPECT_DOUBLE_EQ(t.entropy_bits[1], 2.0);
}

TEST(Balance, RowSumsEqualVocabulary) {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto codes = random_codes(5, 8, 1 + rng.below(100), rng);
        const auto t = balance_table(codes);
        for (Eigen::Index i = 0; i < 5; ++i) EXPECT_EQ(t.counts.row(i).sum(), codes.vocab_size());
    }
}

// ---------------------------------------------------------------- sharing

TEST(Shared, AllDistinctGivesNoGroups) {
    const auto codes = codes_from(2, 4, {{0, 0}, {0, 1}, {1, 0}});
    EXPECT_TRUE(shared_code_groups(codes).empty());
    EXPECT_EQ(distinct_codes(codes), 3u);
}

TEST(Shared, OnePair) {
    const auto g = shared_code_groups(codes_from(2, 4, {{0, 1}, {2, 3}, {0, 1}}), {"a", "b", "c"});
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g[0].indices, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(g[0].words, (std::vector<std::string>{"a", "c"}));
    EXPECT_EQ(g[0].code, (std::vector<std::uint32_t>{0, 1}));
}

TEST(Shared, OrderingIsLargestFirstThenFirstOccurrence) {
    const auto g = shared_code_groups(codes_from(1, 4, {{3}, {1}, {1}, {3}, {2}, {2}, {2}}));
    ASSERT_EQ(g.size(), 3u);
    EXPECT_EQ(g[0].code[0], 2u);
    EXPECT_EQ(g[1].code[0], 3u);  // first seen at word 0
    EXPECT_EQ(g[2].code[0], 1u);
}

TEST(Shared, PartitionIdentityAgainstBruteForce) {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto codes = random_codes(2, 4, 1 + rng.below(60), rng);
        const auto groups = shared_code_groups(codes);
        const std::size_t V = codes.vocab_size();

        // brute force: a word is shared if another word has the same full code
        std::size_t shared = 0;
        std::map<std::vector<std::uint32_t>, int> seen;
        for (Eigen::Index w = 0; w < codes.codes.rows(); ++w) {
            bool dup = false;
            for (Eigen::Index o = 0; o < codes.codes.rows(); ++o) dup |= o != w && codes.codes.row(o) == codes.codes.row(w);
            shared += dup;
            ++seen[{codes.codes.row(w).begin(), codes.codes.row(w).end()}];
        }
        std::size_t in_groups = 0;
        for (const auto& g : groups) in_groups += g.indices.size();
        EXPECT_EQ(in_groups, shared);
        EXPECT_EQ(distinct_codes(codes), seen.size());
        // words in groups + singletons = |V|
        EXPECT_EQ(in_groups + (distinct_codes(codes) - groups.size()), V);
    }
}

// ---------------------------------------------------------------- PQ

TEST(Pq, ExactlyKDistinctBlockVectorsGiveZeroLoss) {
    // every block takes one of 4 values, so 4 centroids per block are exact
    const auto d = make_compositional_data(1, 4, 6, 50, 0.0, 3);
    EmbeddingMatrix tiled;
    tiled.vocab = d.emb.vocab;
    tiled.matrix.resize(50, 12);
    tiled.matrix << d.emb.matrix, d.emb.matrix;
    const auto pq = pq_baseline(tiled, 2, 4, 25, 1);
    EXPECT_NEAR(pq.loss, 0.0, 1e-10);
}

TEST(Pq, SingleCentroidGivesBlockVariance) {
    const auto e = gaussian(200, 6, 4);
    const auto pq = pq_baseline(e, 3, 1, 10, 1);
    // loss = Σ_h mean((x_h − mean_h)²) with the population variance
    const MatD x = e.matrix.cast<double>();
    const RowVec<double> mean = x.colwise().mean();
    double var = 0.0;
    for (Eigen::Index r = 0; r < x.rows(); ++r) var += (x.row(r) - mean).squaredNorm();
    var /= double(x.rows());
    EXPECT_NEAR(pq.loss, var, 1e-5 * var);
}

TEST(Pq, LossHistoryNonIncreasing) {
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto pq = pq_baseline(gaussian(300, 12, seed), 4, 8, 25, seed);
        ASSERT_FALSE(pq.loss_history.empty());
        for (std::size_t i = 1; i < pq.loss_history.size(); ++i) {
            EXPECT_LE(pq.loss_history[i], pq.loss_history[i - 1]) << "seed " << seed << " step " << i;
        }
    }
}

TEST(Pq, ComposeReproducesReconstruction) {
    const auto e = gaussian(120, 8, 5);
    const auto pq = pq_baseline(e, 4, 4, 25, 7);
    const auto recon = reconstruct_all(pq.codes, pq.books);
    const double mse = reconstruction_quality(e.matrix, recon.matrix).mean_squared_distance;
    EXPECT_NEAR(mse, pq.loss, 1e-5 * pq.loss);
    // zero padding: codeword of block i is zero outside block i
    for (std::uint32_t i = 0; i < 4; ++i) {
        for (std::uint32_t k = 0; k < 4; ++k) {
            const auto v = pq.books.codeword(i, k);
            for (Eigen::Index h = 0; h < 8; ++h) {
                if (h / 2 != Eigen::Index(i)) EXPECT_EQ(v(h), 0.0f);
            }
        }
    }
}

TEST(Pq, DeterministicPerSeed) {
    const auto e = gaussian(100, 8, 6);
    EXPECT_EQ(pq_baseline(e, 2, 8, 25, 3).codes, pq_baseline(e, 2, 8, 25, 3).codes);
}

TEST(Pq, IndivisibleDimensionIsConfigError) {
    EXPECT_THROW(pq_baseline(gaussian(10, 10, 1), 3, 4), ConfigError);
}

// ---------------------------------------------------------------- quality

TEST(Quality, CosineAndDistance) {
    MatF a(2, 2), b(2, 2);
    a << 1, 0, 0, 2;
    b << 2, 0, 0, -2;
    const auto q = reconstruction_quality(a, b);
    EXPECT_DOUBLE_EQ(q.cosine[0], 1.0);
    EXPECT_DOUBLE_EQ(q.cosine[1], -1.0);
    EXPECT_DOUBLE_EQ(q.mean_squared_distance, (1.0 + 16.0) / 2.0);
    EXPECT_DOUBLE_EQ(q.min_cosine, -1.0);
    EXPECT_EQ(cosine(RowVec<float>::Zero(3), RowVec<float>::Ones(3)), 0.0);
    EXPECT_THROW(reconstruction_quality(a, MatF(3, 2)), DataError);
}

TEST(NeighborOverlap, IdentityIsOne) {
    const auto e = gaussian(80, 10, 7);
    EXPECT_DOUBLE_EQ(neighbor_overlap(e, e, 10, 30, 1).overlap, 1.0);
}

TEST(NeighborOverlap, InvariantToPositiveScaling) {
    const auto e = gaussian(80, 10, 8);
    auto scaled = e;
    scaled.matrix *= 4.0f;
    EXPECT_DOUBLE_EQ(neighbor_overlap(e, scaled, 5, 80, 1).overlap, 1.0);
}

TEST(NeighborOverlap, IndependentSpacesNearChance) {
    // two unrelated spaces share k/(V−1) of neighbours in expectation
    const std::size_t V = 400, k = 20, sample = 200;
    const auto a = gaussian(V, 16, 9);
    const auto b = gaussian(V, 16, 10);
    const auto r = neighbor_overlap(a, b, k, sample, 3);
    const double p = double(k) / double(V - 1);
    const double se = std::sqrt(p * (1 - p) / double(k * sample));
    EXPECT_NEAR(r.overlap, p, 3 * se);
    EXPECT_EQ(r.queries.size(), sample);
}

TEST(NeighborOverlap, InvalidK) {
    const auto e = gaussian(10, 4, 1);
    EXPECT_THROW(neighbor_overlap(e, e, 10, 5, 1), ConfigError);
    EXPECT_THROW(neighbor_overlap(e, e, 0, 5, 1), ConfigError);
}
