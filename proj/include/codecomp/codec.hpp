#pragma once

// Discrete codes, codebooks, embedding composition and the packed on-disk
// formats for both.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "codecomp/binary_io.hpp"
#include "codecomp/code_model.hpp"
#include "codecomp/embedding_io.hpp"

namespace codecomp {

using CodeRows = Eigen::Matrix<std::uint32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-word tuples of M subcodes, each 0-based in [0, K). K must be a power
/// of two; K = 1 (zero bits) is allowed so degenerate quantizers fit.
struct CodeMatrix {
    std::uint32_t M = 0;
    std::uint32_t K = 0;
    CodeRows codes;  // vocab_size × M

    CodeMatrix() = default;
    CodeMatrix(std::uint32_t m, std::uint32_t k, CodeRows c) : M(m), K(k), codes(std::move(c)) {}

    std::size_t vocab_size() const { return static_cast<std::size_t>(codes.rows()); }
    unsigned bits_per_component() const { return exact_log2(K); }
    std::size_t bits_per_word() const { return static_cast<std::size_t>(M) * bits_per_component(); }
    /// Packed record length, ceil(M·log₂K / 8).
    std::size_t bytes_per_word() const { return (bits_per_word() + 7) / 8; }

    /// Throws DataError on a bad scheme, wrong width or out-of-range subcode.
    void validate() const;

    bool operator==(const CodeMatrix& o) const {
        return M == o.M && K == o.K && codes.rows() == o.codes.rows() &&
               codes.cols() == o.codes.cols() && codes == o.codes;
    }
};

/// M codebooks of K codewords; row i·K + k is codeword k of codebook i.
/// Same layout as ModelParams::A.
struct Codebooks {
    std::uint32_t M = 0;
    std::uint32_t K = 0;
    MatF vectors;  // M·K × H

    std::uint32_t dim() const { return static_cast<std::uint32_t>(vectors.cols()); }
    auto codeword(std::uint32_t book, std::uint32_t k) const {
        return vectors.row(static_cast<Eigen::Index>(book) * K + k);
    }
    void validate() const;
};

/// Noise-free export: each subcode is the argmax of its α slice, ties to the
/// smallest index. With `noise_rng`, Gumbel noise is added to log α first
/// (experimental; not deterministic across seeds).
std::pair<CodeMatrix, Codebooks> export_codes(const ModelParams<float>& params,
                                              const SchemeConfig& cfg,
                                              const EmbeddingMatrix& emb,
                                              Rng* noise_rng = nullptr);

/// Σᵢ codebook i's codeword code[i], summed in ascending i.
RowVec<float> compose_embedding(std::span<const std::uint32_t> code, const Codebooks& books);

/// Row w = compose_embedding(codes[w]). Vocabulary is carried through.
EmbeddingMatrix reconstruct_all(const CodeMatrix& codes, const Codebooks& books,
                                const std::vector<std::string>& vocab = {});

/// Header ("DCC1", u8 1, u32 M, u32 K, u32 |V|) followed by one
/// ceil(M·log₂K/8)-byte record per word. Within a record subcodes are
/// concatenated least-significant-bit first.
Bytes pack_codes(const CodeMatrix& codes);
CodeMatrix unpack_codes(std::span<const std::uint8_t> data);

/// Reads header + records from `r`, leaving it positioned after them.
CodeMatrix read_packed_codes(ByteReader& r);

/// Code file: packed codes followed by the vocabulary.
struct CodeFile {
    CodeMatrix codes;
    std::vector<std::string> vocab;
};
Bytes encode_code_file(const CodeMatrix& codes, const std::vector<std::string>& vocab);
CodeFile decode_code_file(std::span<const std::uint8_t> data, const std::string& what = "code file");
void write_code_file(const std::filesystem::path& path, const CodeMatrix& codes,
                     const std::vector<std::string>& vocab);
CodeFile read_code_file(const std::filesystem::path& path);

/// Codebook file: "DCB1", u8 1, u32 M, u32 K, u32 H, M·K·H f32 row-major.
Bytes encode_codebooks(const Codebooks& books);
Codebooks decode_codebooks(std::span<const std::uint8_t> data, const std::string& what = "codebook file");
void write_codebooks(const std::filesystem::path& path, const Codebooks& books);
Codebooks read_codebooks(const std::filesystem::path& path);

} // namespace codecomp
