#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "codecomp/binary_io.hpp"
#include "codecomp/tensor.hpp"

namespace codecomp {

/// A vocabulary and its |V|×H embedding matrix; row w belongs to vocab[w].
struct EmbeddingMatrix {
    std::vector<std::string> vocab;
    MatF matrix;

    std::size_t size() const { return vocab.size(); }
    std::uint32_t dim() const { return static_cast<std::uint32_t>(matrix.cols()); }

    /// Throws DataError on duplicate words or a row/vocab count mismatch.
    void validate() const;
};

/// Receives non-fatal warnings (duplicate words). Defaults to stderr.
using WarningSink = std::function<void(const std::string&)>;

/// GloVe-style text: one word followed by H whitespace-separated floats per
/// line. Keeps file order; with `limit`, only the first `limit` lines are
/// read. A repeated word keeps its first occurrence.
EmbeddingMatrix read_text_embeddings(const std::filesystem::path& path,
                                     std::optional<std::size_t> limit = std::nullopt,
                                     const WarningSink& warn = {});

/// Inverse of read_text_embeddings. Floats are written in shortest
/// round-trip form, so a read after write restores identical bits.
void write_text_embeddings(const EmbeddingMatrix& emb, const std::filesystem::path& path);

/// "DEM1" binary layout: u8 version, u32 |V|, u32 H, |V|·H f32 row-major,
/// then |V| length-prefixed UTF-8 words. All little-endian.
Bytes encode_binary_embeddings(const EmbeddingMatrix& emb);
EmbeddingMatrix decode_binary_embeddings(std::span<const std::uint8_t> data,
                                         const std::string& what = "embedding file");

void write_binary_embeddings(const EmbeddingMatrix& emb, const std::filesystem::path& path);
EmbeddingMatrix read_binary_embeddings(const std::filesystem::path& path);

/// Reads either format, choosing binary when the file starts with "DEM1".
EmbeddingMatrix read_embeddings(const std::filesystem::path& path,
                                std::optional<std::size_t> limit = std::nullopt,
                                const WarningSink& warn = {});

/// Vocabulary block shared with the code file: |V| u32-length-prefixed words.
void write_vocab(ByteWriter& w, const std::vector<std::string>& vocab);
std::vector<std::string> read_vocab(ByteReader& r, std::size_t count);

} // namespace codecomp
