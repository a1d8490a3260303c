#include "codecomp/embedding_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string_view>
#include <unordered_set>

namespace codecomp {

namespace {

constexpr std::string_view kEmbeddingMagic = "DEM1";
constexpr std::uint8_t kEmbeddingVersion = 1;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

/// Splits on runs of whitespace.
void tokenize(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        const std::size_t start = i;
        while (i < line.size() && !is_space(line[i])) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
}

void default_warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

} // namespace

void EmbeddingMatrix::validate() const {
    if (static_cast<Eigen::Index>(vocab.size()) != matrix.rows()) {
        throw DataError("embedding matrix has " + std::to_string(matrix.rows()) + " rows but " +
                        std::to_string(vocab.size()) + " words");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& w : vocab) {
        if (!seen.insert(w).second) throw DataError("duplicate word in vocabulary: " + w);
    }
}

EmbeddingMatrix read_text_embeddings(const std::filesystem::path& path,
                                     std::optional<std::size_t> limit, const WarningSink& warn) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    const WarningSink& sink = warn ? warn : WarningSink(default_warn);

    std::vector<std::string> vocab;
    std::vector<float> values;
    std::unordered_set<std::string> seen;
    std::vector<std::string_view> tokens;
    std::string line;
    std::size_t line_no = 0, kept_lines = 0;
    long dim = -1;

    while ((!limit || kept_lines < *limit) && std::getline(in, line)) {
        ++line_no;
        tokenize(line, tokens);
        if (tokens.empty()) continue;
        ++kept_lines;
        const long h = static_cast<long>(tokens.size()) - 1;
        if (dim < 0) {
            if (h < 1) throw DataError(path.string() + ":" + std::to_string(line_no) + ": no vector values");
            dim = h;
        } else if (h != dim) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(dim) + " values, found " + std::to_string(h));
        }
        const std::size_t row_start = values.size();
        for (long j = 1; j <= h; ++j) {
            const std::string_view tok = tokens[static_cast<std::size_t>(j)];
            float v = 0.0f;
            const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
                throw DataError(path.string() + ":" + std::to_string(line_no) +
                                ": invalid number \"" + std::string(tok) + "\"");
            }
            values.push_back(v);
        }
        std::string word(tokens[0]);
        if (!seen.insert(word).second) {
            sink(path.string() + ":" + std::to_string(line_no) + ": duplicate word \"" + word +
                 "\", keeping first occurrence");
            values.resize(row_start);
            continue;
        }
        vocab.push_back(std::move(word));
    }
    if (in.bad()) throw DataError("read failed: " + path.string());

    EmbeddingMatrix emb;
    const Eigen::Index rows = static_cast<Eigen::Index>(vocab.size());
    const Eigen::Index cols = dim < 0 ? 0 : dim;
    emb.matrix = Eigen::Map<const MatF>(values.data(), rows, cols);
    emb.vocab = std::move(vocab);
    return emb;
}

void write_text_embeddings(const EmbeddingMatrix& emb, const std::filesystem::path& path) {
    emb.validate();
    for (const auto& w : emb.vocab) {
        if (w.empty()) throw DataError("cannot write an empty word in text format");
        for (char c : w) {
            if (is_space(c)) throw DataError("word \"" + w + "\" contains whitespace; text format cannot represent it");
        }
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    char buf[64];
    for (Eigen::Index r = 0; r < emb.matrix.rows(); ++r) {
        out << emb.vocab[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < emb.matrix.cols(); ++c) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), emb.matrix(r, c));
            out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

void write_vocab(ByteWriter& w, const std::vector<std::string>& vocab) {
    for (const auto& word : vocab) w.string(word);
}

std::vector<std::string> read_vocab(ByteReader& r, std::size_t count) {
    std::vector<std::string> vocab;
    vocab.reserve(count);
    for (std::size_t i = 0; i < count; ++i) vocab.push_back(r.string("vocabulary"));
    return vocab;
}

Bytes encode_binary_embeddings(const EmbeddingMatrix& emb) {
    emb.validate();
    ByteWriter w;
    w.magic(kEmbeddingMagic);
    w.u8(kEmbeddingVersion);
    w.u32(static_cast<std::uint32_t>(emb.matrix.rows()));
    w.u32(static_cast<std::uint32_t>(emb.matrix.cols()));
    w.f32s({emb.matrix.data(), static_cast<std::size_t>(emb.matrix.size())});
    write_vocab(w, emb.vocab);
    return w.take();
}

EmbeddingMatrix decode_binary_embeddings(std::span<const std::uint8_t> data, const std::string& what) {
    ByteReader r(data, what);
    r.expect_magic(kEmbeddingMagic);
    const auto version = r.u8("version");
    if (version != kEmbeddingVersion) r.fail("unsupported version " + std::to_string(version));
    const std::uint32_t rows = r.u32("vocab size");
    const std::uint32_t cols = r.u32("dimension");
    EmbeddingMatrix emb;
    emb.matrix.resize(rows, cols);
    r.f32s({emb.matrix.data(), static_cast<std::size_t>(emb.matrix.size())}, "float payload");
    if (!emb.matrix.allFinite()) throw DataError(what + ": non-finite value in float payload");
    emb.vocab = read_vocab(r, rows);
    r.expect_end();
    emb.validate();
    return emb;
}

void write_binary_embeddings(const EmbeddingMatrix& emb, const std::filesystem::path& path) {
    write_file(path, encode_binary_embeddings(emb));
}

EmbeddingMatrix read_binary_embeddings(const std::filesystem::path& path) {
    return decode_binary_embeddings(read_file(path), path.string());
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path, std::optional<std::size_t> limit,
                                const WarningSink& warn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    char head[4] = {};
    in.read(head, 4);
    if (in.gcount() == 4 && std::string_view(head, 4) == kEmbeddingMagic) {
        in.close();
        EmbeddingMatrix emb = read_binary_embeddings(path);
        if (limit && *limit < emb.size()) {
            emb.vocab.resize(*limit);
            emb.matrix.conservativeResize(static_cast<Eigen::Index>(*limit), Eigen::NoChange);
        }
        return emb;
    }
    in.close();
    return read_text_embeddings(path, limit, warn);
}

} // namespace codecomp
