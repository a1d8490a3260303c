#pragma once

// Storage accounting, code-usage statistics, a product-quantization
// baseline and reconstruction-quality metrics.

#include <cstdint>
#include <string>
#include <vector>

#include "codecomp/codec.hpp"
#include "codecomp/report.hpp"

namespace codecomp {

// ---------------------------------------------------------------- storage

/// Raw byte counts for storing |V| codes plus M·K float codewords.
struct SizeReport {
    std::uint32_t M = 0, K = 0, H = 0;
    std::uint64_t vocab_size = 0;
    std::uint64_t num_vectors = 0;          // M·K
    std::uint64_t vector_bytes = 0;         // M·K·H·4
    std::uint64_t code_bits_per_word = 0;   // M·log₂K
    std::uint64_t code_bytes_exact = 0;     // ceil(|V|·M·log₂K / 8)
    std::uint64_t code_bytes_aligned = 0;   // |V|·ceil(M·log₂K / 8)
    std::uint64_t total_bytes_exact = 0;
    std::uint64_t total_bytes_aligned = 0;
    std::uint64_t baseline_bytes = 0;       // |V|·H·4
    double compression_ratio = 0.0;         // baseline / total_exact
    /// A binary code addressing the same N = M·K basis vectors needs N/2 bits.
    std::uint64_t binary_code_bits = 0;
};

SizeReport size_report(const SchemeConfig& scheme, std::uint64_t vocab_size);
Report to_report(const SizeReport& s);

// ---------------------------------------------------------------- balance

/// counts(i, k) = number of words whose component i is k. Row sums are |V|.
struct BalanceTable {
    Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> counts;  // M × K
    std::uint64_t min_count = 0;
    std::uint64_t max_count = 0;
    std::vector<double> entropy_bits;  // per component, log₂ base
    std::uint64_t dead_codewords = 0;  // (i, k) cells with zero count
};

BalanceTable balance_table(const CodeMatrix& codes);
Report to_report(const BalanceTable& t);
/// M rows, K columns, no header.
std::string to_csv(const BalanceTable& t);

// ---------------------------------------------------------------- sharing

struct SharedCodeGroup {
    std::vector<std::uint32_t> code;
    std::vector<std::size_t> indices;  // ascending word positions
    std::vector<std::string> words;    // empty when no vocabulary was given
};

/// Groups of ≥ 2 words with identical full codes, largest first; equal
/// sizes keep first-occurrence order.
std::vector<SharedCodeGroup> shared_code_groups(const CodeMatrix& codes,
                                                const std::vector<std::string>& vocab = {});

/// Number of distinct full codes in use.
std::size_t distinct_codes(const CodeMatrix& codes);

// ---------------------------------------------------------------- k-means / PQ

struct KMeansResult {
    MatF centroids;                        // k × dim
    std::vector<std::uint32_t> assignment; // per point
    std::vector<double> loss_history;      // mean squared distance, one per assignment step
    double loss = 0.0;                     // final
};

inline constexpr unsigned kDefaultKMeansIterations = 25;

/// Lloyd's algorithm with k-means++ seeding. An empty cluster is re-seeded
/// with the point farthest from its centroid inside the largest cluster.
/// Stops early once assignments no longer change.
KMeansResult kmeans(const MatF& points, std::uint32_t k, unsigned max_iterations, Rng& rng);

struct PqResult {
    CodeMatrix codes;
    Codebooks books;                    // block centroids zero-padded to full width
    double loss = 0.0;                  // mean squared reconstruction distance
    std::vector<double> loss_history;   // summed over blocks, per iteration
};

/// Product quantization: H split into M contiguous blocks of H/M, k-means
/// with K centroids per block. compose_embedding on the result reproduces
/// the PQ reconstruction.
PqResult pq_baseline(const EmbeddingMatrix& emb, std::uint32_t M, std::uint32_t K,
                     unsigned iterations = kDefaultKMeansIterations, std::uint64_t seed = 0);

// ---------------------------------------------------------------- quality

struct ReconstructionQuality {
    double mean_squared_distance = 0.0;  // same convention as the training loss
    double mean_cosine = 0.0;
    double min_cosine = 0.0;
    std::vector<double> cosine;          // per word
};

ReconstructionQuality reconstruction_quality(const MatF& original, const MatF& recon);
Report to_report(const ReconstructionQuality& q);

/// Cosine similarity of two rows in double; 0 if either has zero norm.
double cosine(const RowVec<float>& a, const RowVec<float>& b);

struct NeighborOverlap {
    double overlap = 0.0;                 // mean over queries
    std::vector<std::size_t> queries;
    std::vector<double> per_query;
};

/// For `sample` seeded random query words (all words if sample ≥ |V|), the
/// fraction of top-k cosine neighbours, self excluded, shared between the
/// two spaces. Brute force; ties broken toward the smaller index.
NeighborOverlap neighbor_overlap(const EmbeddingMatrix& original, const EmbeddingMatrix& recon,
                                 std::size_t k, std::size_t sample, std::uint64_t seed);

} // namespace codecomp
