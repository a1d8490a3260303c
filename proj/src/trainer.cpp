#include "codecomp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

namespace codecomp {

namespace {

constexpr Eigen::Index kEvalChunk = 4096;

MatF gather_rows(const MatF& src, std::span<const std::size_t> rows) {
    MatF out(static_cast<Eigen::Index>(rows.size()), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = src.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

struct StepResult {
    Gradients<float> grads;
    double loss = 0.0;
};

StepResult gradient_step(const ModelParams<float>& params, const MatF& batch, const MatF& noise,
                         const SchemeConfig& cfg) {
    auto tr = forward(params, batch, noise, cfg);
    return {backward(params, batch, cfg, tr), tr.loss};
}

/// Splits the batch into contiguous row blocks, one per worker, and combines
/// the per-block mean gradients weighted by block size, in block order.
StepResult parallel_gradient_step(const ModelParams<float>& params, const MatF& batch,
                                  const MatF& noise, const SchemeConfig& cfg, unsigned threads) {
    const Eigen::Index B = batch.rows();
    const Eigen::Index workers = std::min<Eigen::Index>(threads, B);
    std::vector<StepResult> parts(static_cast<std::size_t>(workers));
    std::vector<Eigen::Index> starts(static_cast<std::size_t>(workers) + 1);
    for (Eigen::Index w = 0; w <= workers; ++w) starts[static_cast<std::size_t>(w)] = B * w / workers;

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (Eigen::Index w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const auto i = static_cast<std::size_t>(w);
            const Eigen::Index lo = starts[i], n = starts[i + 1] - starts[i];
            try {
                parts[i] = gradient_step(params, batch.middleRows(lo, n), noise.middleRows(lo, n), cfg);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    StepResult total{Gradients<float>::zeros(cfg), 0.0};
    auto dst = total.grads.groups();
    for (Eigen::Index w = 0; w < workers; ++w) {
        const auto i = static_cast<std::size_t>(w);
        const double weight = static_cast<double>(starts[i + 1] - starts[i]) / static_cast<double>(B);
        const auto src = parts[i].grads.groups();
        for (std::size_t g = 0; g < dst.size(); ++g) *dst[g] += *src[g] * static_cast<float>(weight);
        total.loss += weight * parts[i].loss;
    }
    return total;
}

} // namespace

void TrainConfig::validate() const {
    scheme.validate();
    if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
    if (validate_every < 1) throw ConfigError("train: validate_every must be >= 1");
    if (iterations != 0 && iterations < validate_every) {
        throw ConfigError("train: iterations (" + std::to_string(iterations) +
                          ") must be >= validate_every (" + std::to_string(validate_every) + ")");
    }
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train: learning rate must be > 0");
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("train: val_fraction must be in (0, 1)");
    if (threads < 1) throw ConfigError("train: threads must be >= 1");
}

ValidationSplit split_validation(std::size_t vocab_size, const TrainConfig& tc, Rng& rng) {
    if (vocab_size < kMinVocabForTraining) {
        throw ConfigError("vocabulary of " + std::to_string(vocab_size) + " words is too small; need at least " +
                          std::to_string(kMinVocabForTraining));
    }
    if (!(tc.val_fraction > 0.0 && tc.val_fraction < 1.0)) {
        throw ConfigError("val_fraction must be in (0, 1)");
    }
    auto n_val = static_cast<std::size_t>(std::llround(tc.val_fraction * static_cast<double>(vocab_size)));
    n_val = std::clamp(n_val, kMinValidationWords, kMaxValidationWords);

    std::vector<std::size_t> order(vocab_size);
    for (std::size_t i = 0; i < vocab_size; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);

    ValidationSplit split;
    split.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.train.begin(), split.train.end());
    return split;
}

double dataset_loss(const ModelParams<float>& params, const MatF& data, const SchemeConfig& cfg,
                    ForwardMode mode) {
    const Eigen::Index n = data.rows();
    if (n == 0) return 0.0;
    double total = 0.0;
    for (Eigen::Index start = 0; start < n; start += kEvalChunk) {
        const Eigen::Index len = std::min(kEvalChunk, n - start);
        const MatF chunk = data.middleRows(start, len);
        total += evaluate_loss(params, chunk, cfg, mode) * static_cast<double>(len);
    }
    return total / static_cast<double>(n);
}

TrainResult train(const EmbeddingMatrix& emb, const TrainConfig& tc, const ValidationHook& hook) {
    tc.validate();
    emb.validate();
    const SchemeConfig& cfg = tc.scheme;
    if (emb.dim() != cfg.H) {
        throw ConfigError("train: embedding dimension " + std::to_string(emb.dim()) +
                          " does not match scheme H = " + std::to_string(cfg.H));
    }
    const auto t0 = std::chrono::steady_clock::now();

    // Independent streams so that, e.g., changing the split does not shift
    // the noise sequence.
    Rng master(tc.seed);
    Rng split_rng = master.split();
    Rng init_rng = master.split();
    Rng batch_rng = master.split();
    Rng noise_rng = master.split();

    TrainResult result;
    result.params = init_params(cfg, init_rng);
    if (tc.iterations == 0) return result;

    const ValidationSplit split = split_validation(emb.size(), tc, split_rng);
    const MatF val = gather_rows(emb.matrix, split.val);

    ModelParams<float> params = result.params;
    AdamState adam = AdamState::for_scheme(cfg, tc.lr);
    std::vector<std::size_t> picks(tc.batch_size);
    const Eigen::Index B = static_cast<Eigen::Index>(tc.batch_size);

    for (std::uint64_t it = 1; it <= tc.iterations; ++it) {
        for (auto& p : picks) p = split.train[batch_rng.below(split.train.size())];
        const MatF batch = gather_rows(emb.matrix, picks);
        const MatF noise = sample_gumbel(noise_rng, B, cfg.num_codewords());

        StepResult step;
        try {
            step = tc.threads > 1 ? parallel_gradient_step(params, batch, noise, cfg, tc.threads)
                                  : gradient_step(params, batch, noise, cfg);
        } catch (const NumericError& e) {
            throw NumericError("training diverged at iteration " + std::to_string(it) + ": " + e.what());
        }
        adam_step(params, step.grads, adam);
        result.report.iterations_run = it;

        if (it % tc.validate_every == 0) {
            double loss;
            try {
                loss = dataset_loss(params, val, cfg);
            } catch (const NumericError& e) {
                throw NumericError("validation failed at iteration " + std::to_string(it) + ": " + e.what());
            }
            const ValidationPoint point{it, loss};
            result.report.val_loss_history.push_back(point);
            const bool improved = loss < result.report.best_val_loss;
            if (improved) {
                result.report.best_val_loss = loss;
                result.report.best_iteration = it;
                result.params = params;
            }
            if (hook) hook(point, improved, result.params);
        }
    }

    result.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

} // namespace codecomp
