#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "codecomp/code_model.hpp"
#include "codecomp/embedding_io.hpp"

namespace codecomp {

struct TrainConfig {
    SchemeConfig scheme;
    std::size_t batch_size = 128;
    double lr = 1e-4;
    std::uint64_t iterations = 200000;
    std::uint64_t validate_every = 1000;
    std::uint64_t seed = 0;
    double val_fraction = 0.05;
    /// Worker threads for the data-parallel gradient; 1 is the reference path.
    unsigned threads = 1;

    /// Throws ConfigError. iterations == 0 is accepted (returns the init).
    void validate() const;
};

inline constexpr std::size_t kMaxValidationWords = 3000;
inline constexpr std::size_t kMinValidationWords = 10;
inline constexpr std::size_t kMinVocabForTraining = 20;

struct ValidationSplit {
    std::vector<std::size_t> train;  // ascending
    std::vector<std::size_t> val;    // ascending
};

/// Disjoint random split; |val| = clamp(round(fraction·|V|), 10, 3000).
ValidationSplit split_validation(std::size_t vocab_size, const TrainConfig& tc, Rng& rng);

struct ValidationPoint {
    std::uint64_t iteration = 0;
    double loss = 0.0;
};

struct TrainReport {
    /// +inf until the first validation.
    double best_val_loss = std::numeric_limits<double>::infinity();
    std::uint64_t best_iteration = 0;
    std::vector<ValidationPoint> val_loss_history;
    double wall_seconds = 0.0;
    std::uint64_t iterations_run = 0;
};

struct TrainResult {
    ModelParams<float> params;
    TrainReport report;
};

/// Called after every validation. `params` are the best parameters so far;
/// `improved` is true when this validation produced them.
using ValidationHook = std::function<void(const ValidationPoint& point, bool improved,
                                          const ModelParams<float>& params)>;

/// Minibatch Adam on the reconstruction loss. Each iteration draws
/// batch_size training rows uniformly with replacement and fresh Gumbel
/// noise. Every validate_every iterations the noise-free validation loss is
/// measured and the parameters are kept if it improved. Returns the best
/// parameters seen (the initialization if no validation ran).
///
/// A non-finite loss or gradient aborts with NumericError; the hook has
/// already received the last good parameters.
TrainResult train(const EmbeddingMatrix& emb, const TrainConfig& tc, const ValidationHook& hook = {});

/// Mean loss over all rows of `data`, noise-free.
double dataset_loss(const ModelParams<float>& params, const MatF& data, const SchemeConfig& cfg,
                    ForwardMode mode = ForwardMode::Soft);

} // namespace codecomp
