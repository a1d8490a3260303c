#include "codecomp/codec.hpp"

#include <algorithm>

namespace codecomp {

namespace {

constexpr std::string_view kCodeMagic = "DCC1";
constexpr std::string_view kBookMagic = "DCB1";
constexpr std::uint8_t kFormatVersion = 1;
constexpr Eigen::Index kExportChunk = 1024;

void check_code_scheme(std::uint32_t M, std::uint32_t K, const char* what) {
    if (M < 1) throw DataError(std::string(what) + ": M must be >= 1");
    if (K < 1 || !is_power_of_two(K)) {
        throw DataError(std::string(what) + ": K must be a power of two, got " + std::to_string(K));
    }
}

} // namespace

void CodeMatrix::validate() const {
    check_code_scheme(M, K, "codes");
    if (codes.cols() != static_cast<Eigen::Index>(M) && codes.rows() != 0) {
        throw DataError("codes: expected " + std::to_string(M) + " components per word, found " +
                        std::to_string(codes.cols()));
    }
    for (Eigen::Index r = 0; r < codes.rows(); ++r) {
        for (Eigen::Index i = 0; i < codes.cols(); ++i) {
            if (codes(r, i) >= K) {
                throw DataError("codes: word " + std::to_string(r) + " component " + std::to_string(i) +
                                " = " + std::to_string(codes(r, i)) + " is out of range [0, " +
                                std::to_string(K) + ")");
            }
        }
    }
}

void Codebooks::validate() const {
    check_code_scheme(M, K, "codebooks");
    if (vectors.rows() != static_cast<Eigen::Index>(M) * K) {
        throw DataError("codebooks: expected " + std::to_string(M * K) + " codewords, found " +
                        std::to_string(vectors.rows()));
    }
    if (!vectors.allFinite()) throw DataError("codebooks: non-finite entry");
}

std::pair<CodeMatrix, Codebooks> export_codes(const ModelParams<float>& params, const SchemeConfig& cfg,
                                              const EmbeddingMatrix& emb, Rng* noise_rng) {
    cfg.validate();
    check_shapes(params, cfg);
    if (emb.dim() != cfg.H && emb.size() != 0) {
        throw ConfigError("export: embedding dimension " + std::to_string(emb.dim()) +
                          " does not match model H = " + std::to_string(cfg.H));
    }
    const Eigen::Index V = static_cast<Eigen::Index>(emb.size());
    CodeRows codes(V, cfg.M);
    for (Eigen::Index start = 0; start < V; start += kExportChunk) {
        const Eigen::Index n = std::min(kExportChunk, V - start);
        const MatF chunk = emb.matrix.middleRows(start, n);
        const MatF noise = noise_rng ? sample_gumbel(*noise_rng, n, cfg.num_codewords()) : MatF();
        const auto tr = forward(params, chunk, MatF(), cfg, ForwardMode::Hard);
        codes.middleRows(start, n) = hard_codes(tr.alpha, noise, cfg);
    }
    return {CodeMatrix(cfg.M, cfg.K, std::move(codes)), Codebooks{cfg.M, cfg.K, params.A}};
}

RowVec<float> compose_embedding(std::span<const std::uint32_t> code, const Codebooks& books) {
    if (code.size() != books.M) {
        throw DataError("compose: code has " + std::to_string(code.size()) + " components, codebooks have " +
                        std::to_string(books.M));
    }
    Eigen::Matrix<double, 1, Eigen::Dynamic> acc = Eigen::Matrix<double, 1, Eigen::Dynamic>::Zero(books.dim());
    for (std::uint32_t i = 0; i < books.M; ++i) {
        if (code[i] >= books.K) {
            throw DataError("compose: component " + std::to_string(i) + " = " + std::to_string(code[i]) +
                            " is out of range [0, " + std::to_string(books.K) + ")");
        }
        acc += books.codeword(i, code[i]).cast<double>();
    }
    return acc.cast<float>();
}

EmbeddingMatrix reconstruct_all(const CodeMatrix& codes, const Codebooks& books,
                                const std::vector<std::string>& vocab) {
    if (codes.M != books.M || codes.K != books.K) {
        throw DataError("reconstruct: codes are " + std::to_string(codes.M) + "x" + std::to_string(codes.K) +
                        " but codebooks are " + std::to_string(books.M) + "x" + std::to_string(books.K));
    }
    if (!vocab.empty() && vocab.size() != codes.vocab_size()) {
        throw DataError("reconstruct: vocabulary size does not match code count");
    }
    EmbeddingMatrix out;
    out.vocab = vocab;
    out.matrix.resize(static_cast<Eigen::Index>(codes.vocab_size()), books.dim());
    for (Eigen::Index w = 0; w < codes.codes.rows(); ++w) {
        out.matrix.row(w) = compose_embedding({codes.codes.row(w).data(), codes.M}, books);
    }
    return out;
}

Bytes pack_codes(const CodeMatrix& codes) {
    codes.validate();
    ByteWriter w;
    w.magic(kCodeMagic);
    w.u8(kFormatVersion);
    w.u32(codes.M);
    w.u32(codes.K);
    w.u32(static_cast<std::uint32_t>(codes.vocab_size()));

    const unsigned bits = codes.bits_per_component();
    const std::size_t record = codes.bytes_per_word();
    auto& out = w.bytes();
    const std::size_t base = out.size();
    out.resize(base + record * codes.vocab_size(), 0);
    for (Eigen::Index r = 0; r < codes.codes.rows(); ++r) {
        std::uint8_t* rec = out.data() + base + static_cast<std::size_t>(r) * record;
        std::size_t bitpos = 0;
        for (std::uint32_t i = 0; i < codes.M; ++i) {
            const std::uint32_t v = codes.codes(r, i);
            for (unsigned b = 0; b < bits; ++b, ++bitpos) {
                if ((v >> b) & 1u) rec[bitpos / 8] |= static_cast<std::uint8_t>(1u << (bitpos % 8));
            }
        }
    }
    return w.take();
}

CodeMatrix read_packed_codes(ByteReader& r) {
    r.expect_magic(kCodeMagic);
    const auto version = r.u8("version");
    if (version != kFormatVersion) r.fail("unsupported version " + std::to_string(version));
    const std::uint32_t M = r.u32("M");
    const std::uint32_t K = r.u32("K");
    const std::uint32_t V = r.u32("vocab size");
    if (M < 1 || K < 1 || !is_power_of_two(K)) {
        r.fail("invalid scheme M=" + std::to_string(M) + " K=" + std::to_string(K));
    }
    CodeMatrix cm(M, K, CodeRows(V, M));
    const unsigned bits = cm.bits_per_component();
    const std::size_t record = cm.bytes_per_word();
    const std::size_t total = record * V;
    if (r.remaining() < total) {
        r.fail("truncated code records: expected " + std::to_string(total) + " bytes, got " +
               std::to_string(r.remaining()));
    }
    const auto payload = r.raw(total, "code records");
    for (std::uint32_t w = 0; w < V; ++w) {
        const std::uint8_t* rec = payload.data() + static_cast<std::size_t>(w) * record;
        std::size_t bitpos = 0;
        for (std::uint32_t i = 0; i < M; ++i) {
            std::uint32_t v = 0;
            for (unsigned b = 0; b < bits; ++b, ++bitpos) {
                v |= static_cast<std::uint32_t>((rec[bitpos / 8] >> (bitpos % 8)) & 1u) << b;
            }
            cm.codes(w, i) = v;
        }
    }
    return cm;
}

CodeMatrix unpack_codes(std::span<const std::uint8_t> data) {
    ByteReader r(data, "packed codes");
    CodeMatrix cm = read_packed_codes(r);
    r.expect_end();
    return cm;
}

Bytes encode_code_file(const CodeMatrix& codes, const std::vector<std::string>& vocab) {
    if (vocab.size() != codes.vocab_size()) {
        throw DataError("code file: " + std::to_string(vocab.size()) + " words for " +
                        std::to_string(codes.vocab_size()) + " codes");
    }
    ByteWriter w;
    w.raw(pack_codes(codes));
    write_vocab(w, vocab);
    return w.take();
}

CodeFile decode_code_file(std::span<const std::uint8_t> data, const std::string& what) {
    ByteReader r(data, what);
    CodeFile f;
    f.codes = read_packed_codes(r);
    f.vocab = read_vocab(r, f.codes.vocab_size());
    r.expect_end();
    return f;
}

void write_code_file(const std::filesystem::path& path, const CodeMatrix& codes,
                     const std::vector<std::string>& vocab) {
    write_file(path, encode_code_file(codes, vocab));
}

CodeFile read_code_file(const std::filesystem::path& path) {
    return decode_code_file(read_file(path), path.string());
}

Bytes encode_codebooks(const Codebooks& books) {
    books.validate();
    ByteWriter w;
    w.magic(kBookMagic);
    w.u8(kFormatVersion);
    w.u32(books.M);
    w.u32(books.K);
    w.u32(books.dim());
    w.f32s({books.vectors.data(), static_cast<std::size_t>(books.vectors.size())});
    return w.take();
}

Codebooks decode_codebooks(std::span<const std::uint8_t> data, const std::string& what) {
    ByteReader r(data, what);
    r.expect_magic(kBookMagic);
    const auto version = r.u8("version");
    if (version != kFormatVersion) r.fail("unsupported version " + std::to_string(version));
    Codebooks books;
    books.M = r.u32("M");
    books.K = r.u32("K");
    const std::uint32_t H = r.u32("H");
    if (books.M < 1 || books.K < 1 || !is_power_of_two(books.K)) {
        r.fail("invalid scheme M=" + std::to_string(books.M) + " K=" + std::to_string(books.K));
    }
    books.vectors.resize(static_cast<Eigen::Index>(books.M) * books.K, H);
    r.f32s({books.vectors.data(), static_cast<std::size_t>(books.vectors.size())}, "codeword payload");
    r.expect_end();
    books.validate();
    return books;
}

void write_codebooks(const std::filesystem::path& path, const Codebooks& books) {
    write_file(path, encode_codebooks(books));
}

Codebooks read_codebooks(const std::filesystem::path& path) {
    return decode_codebooks(read_file(path), path.string());
}

} // namespace codecomp
