#include <gtest/gtest.h>

#include "codecomp/codec.hpp"
#include "codecomp/synthetic.hpp"

using namespace codecomp;

namespace {

CodeMatrix random_codes(std::uint32_t M, std::uint32_t K, std::size_t V, Rng& rng) {
    CodeRows c(static_cast<Eigen::Index>(V), M);
    for (Eigen::Index w = 0; w < c.rows(); ++w) {
        for (std::uint32_t i = 0; i < M; ++i) c(w, i) = static_cast<std::uint32_t>(rng.below(K));
    }
    return CodeMatrix(M, K, std::move(c));
}

Codebooks random_books(std::uint32_t M, std::uint32_t K, std::uint32_t H, Rng& rng) {
    return Codebooks{M, K, uniform_matrix(rng, static_cast<Eigen::Index>(M) * K, H, 1.0)};
}

std::vector<std::string> words(std::size_t n) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back("word" + std::to_string(i));
    return v;
}

} // namespace

TEST(Compose, ZeroCodebooksGiveZeroVector) {
    const Codebooks books{3, 4, MatF::Zero(12, 5)};
    const std::uint32_t code[] = {1, 2, 3};
    EXPECT_TRUE(compose_embedding(code, books).isZero(0));
}

TEST(Compose, SingleCodebookSelectsCodewordExactly) {
    Rng rng(1);
    const auto books = random_books(1, 8, 6, rng);
    for (std::uint32_t k = 0; k < 8; ++k) {
        const std::uint32_t code[] = {k};
        EXPECT_EQ(compose_embedding(code, books), books.vectors.row(k));
    }
}

TEST(Compose, MatchesScalarSumOracle) {
    Rng rng(2);
    const auto books = random_books(4, 8, 16, rng);
    for (int trial = 0; trial < 50; ++trial) {
        std::uint32_t code[4];
        for (auto& c : code) c = static_cast<std::uint32_t>(rng.below(8));
        const auto got = compose_embedding(code, books);
        for (int h = 0; h < 16; ++h) {
            double s = 0.0;
            for (int i = 0; i < 4; ++i) s += double(books.vectors(i * 8 + code[i], h));
            EXPECT_EQ(got(h), static_cast<float>(s));
        }
    }
}

TEST(Compose, LinearInCodebooks) {
    Rng rng(3);
    const auto books = random_books(3, 4, 7, rng);
    Codebooks scaled = books;
    scaled.vectors *= 2.0f;  // power-of-two scaling is exact in float
    const std::uint32_t code[] = {0, 3, 1};
    EXPECT_EQ(compose_embedding(code, scaled), RowVec<float>(2.0f * compose_embedding(code, books)));
}

TEST(Compose, OutOfRangeComponentIsDataError) {
    const Codebooks books{2, 4, MatF::Zero(8, 3)};
    const std::uint32_t bad[] = {0, 4};
    EXPECT_THROW(compose_embedding(bad, books), DataError);
    const std::uint32_t short_code[] = {0};
    EXPECT_THROW(compose_embedding(short_code, books), DataError);
}

TEST(Reconstruct, RecoversEmbeddingsBuiltFromTheirCodes) {
    const auto data = make_compositional_data(3, 4, 5, 12, 0.0, 9);
    const auto recon = reconstruct_all(data.codes, data.books, data.emb.vocab);
    EXPECT_EQ(recon.matrix, data.emb.matrix);
    EXPECT_EQ(recon.vocab, data.emb.vocab);
}

TEST(Reconstruct, EmptyVocabulary) {
    const CodeMatrix empty(2, 4, CodeRows(0, 2));
    const auto out = reconstruct_all(empty, Codebooks{2, 4, MatF::Zero(8, 3)});
    EXPECT_EQ(out.matrix.rows(), 0);
    EXPECT_EQ(out.matrix.cols(), 3);
}

TEST(Reconstruct, SchemeMismatchIsDataError) {
    Rng rng(4);
    const auto codes = random_codes(2, 4, 3, rng);
    EXPECT_THROW(reconstruct_all(codes, Codebooks{2, 8, MatF::Zero(16, 3)}), DataError);
    EXPECT_THROW(reconstruct_all(codes, Codebooks{3, 4, MatF::Zero(12, 3)}), DataError);
}

TEST(Export, ArgmaxOverAlphaIsDeterministic) {
    const SchemeConfig cfg{4, 8, 10, 1.0};
    Rng rng(5);
    const auto params = init_params(cfg, rng);
    EmbeddingMatrix emb;
    emb.matrix = uniform_matrix(rng, 40, 10, 1.0);
    emb.vocab = words(40);
    const auto [c1, b1] = export_codes(params, cfg, emb);
    const auto [c2, b2] = export_codes(params, cfg, emb);
    EXPECT_EQ(c1, c2);
    EXPECT_EQ(b1.vectors, params.A);
    c1.validate();

    const auto tr = forward(params, emb.matrix, MatF(), cfg);
    EXPECT_EQ(c1.codes, hard_codes(tr.alpha, MatF(), cfg));
}

TEST(Export, DimensionMismatchIsConfigError) {
    const SchemeConfig cfg{2, 4, 6, 1.0};
    Rng rng(6);
    const auto params = init_params(cfg, rng);
    EmbeddingMatrix emb;
    emb.matrix = MatF::Zero(3, 5);
    emb.vocab = words(3);
    EXPECT_THROW(export_codes(params, cfg, emb), ConfigError);
}

TEST(Pack, StandardSchemesRecordLengths) {
    // 32×16 → 128 bits = 16 bytes, 16×32 → 80 bits = 10 bytes per word
    EXPECT_EQ(CodeMatrix(32, 16, CodeRows(0, 32)).bytes_per_word(), 16u);
    EXPECT_EQ(CodeMatrix(16, 32, CodeRows(0, 16)).bytes_per_word(), 10u);
    EXPECT_EQ(CodeMatrix(8, 64, CodeRows(0, 8)).bytes_per_word(), 6u);
    EXPECT_EQ(CodeMatrix(64, 8, CodeRows(0, 64)).bytes_per_word(), 24u);
    EXPECT_EQ(CodeMatrix(3, 4, CodeRows(0, 3)).bytes_per_word(), 1u);  // 6 bits padded

    Rng rng(7);
    const auto codes = random_codes(32, 16, 5, rng);
    EXPECT_EQ(pack_codes(codes).size(), 17u + 5u * 16u);
}

TEST(Pack, KnownBitLayout) {
    // M=3, K=8 (3 bits): 5 | 2<<3 | 7<<6 = 0b111'010'101 = 469 → bytes D5 01
    CodeRows c(1, 3);
    c << 5, 2, 7;
    const Bytes b = pack_codes(CodeMatrix(3, 8, c));
    ASSERT_EQ(b.size(), 17u + 2u);
    EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "DCC1");
    EXPECT_EQ(b[4], 1);
    EXPECT_EQ(b[5], 3);   // M
    EXPECT_EQ(b[9], 8);   // K
    EXPECT_EQ(b[13], 1);  // |V|
    EXPECT_EQ(b[17], 0xD5);
    EXPECT_EQ(b[18], 0x01);
}

TEST(Pack, RoundTripProperty) {
    Rng rng(8);
    const std::pair<std::uint32_t, std::uint32_t> schemes[] = {{1, 2}, {8, 8}, {16, 32}, {32, 16}, {64, 8}, {3, 1024}, {5, 1}};
    for (int trial = 0; trial < 500; ++trial) {
        const auto [M, K] = schemes[trial % std::size(schemes)];
        const auto codes = random_codes(M, K, rng.below(20), rng);
        EXPECT_EQ(unpack_codes(pack_codes(codes)), codes);
    }
}

TEST(Pack, CorruptInputIsDataErrorWithOffset) {
    Rng rng(9);
    const auto codes = random_codes(4, 16, 10, rng);
    Bytes b = pack_codes(codes);

    Bytes truncated(b.begin(), b.end() - 3);
    try {
        unpack_codes(truncated);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("byte offset 17"), std::string::npos) << e.what();
    }
    Bytes bad_magic = b;
    bad_magic[0] = 'X';
    EXPECT_THROW(unpack_codes(bad_magic), DataError);
    Bytes bad_k = b;
    bad_k[9] = 3;
    EXPECT_THROW(unpack_codes(bad_k), DataError);
    Bytes trailing = b;
    trailing.push_back(0);
    EXPECT_THROW(unpack_codes(trailing), DataError);
    EXPECT_THROW(unpack_codes(Bytes{}), DataError);
}

TEST(Pack, RejectsOutOfRangeCodes) {
    CodeRows c(1, 2);
    c << 1, 4;
    EXPECT_THROW(pack_codes(CodeMatrix(2, 4, c)), DataError);
    EXPECT_THROW(pack_codes(CodeMatrix(2, 6, CodeRows(0, 2))), DataError);
}

TEST(CodeFile, RoundTripWithVocabulary) {
    Rng rng(10);
    const auto codes = random_codes(8, 8, 30, rng);
    auto vocab = words(30);
    vocab[3] = "naïve";  // UTF-8 passes through untouched
    const auto f = decode_code_file(encode_code_file(codes, vocab));
    EXPECT_EQ(f.codes, codes);
    EXPECT_EQ(f.vocab, vocab);
    EXPECT_THROW(encode_code_file(codes, words(29)), DataError);
}

TEST(CodebookFile, RoundTripAndErrors) {
    Rng rng(11);
    const auto books = random_books(4, 8, 9, rng);
    const Bytes b = encode_codebooks(books);
    EXPECT_EQ(b.size(), 17u + 4u * 8u * 9u * 4u);
    const auto back = decode_codebooks(b);
    EXPECT_EQ(back.vectors, books.vectors);
    EXPECT_EQ(back.M, 4u);
    EXPECT_EQ(back.K, 8u);
    EXPECT_THROW(decode_codebooks(Bytes(b.begin(), b.end() - 1)), DataError);
    Bytes v2 = b;
    v2[4] = 2;
    EXPECT_THROW(decode_codebooks(v2), DataError);
}
