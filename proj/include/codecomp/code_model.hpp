#pragma once

// The code-learning network: a one-hidden-layer encoder produces, for each of
// the M components, K positive scores α; Gumbel-softmax turns them into soft
// one-hot vectors d; the decoder sums d-weighted codewords from the combined
// codebook A. Everything is templated on the scalar so that the float
// training path and the double shadow used for gradient checks share code.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "codecomp/scheme.hpp"
#include "codecomp/tensor.hpp"

namespace codecomp {

/// Floor applied to α before taking its log.
inline constexpr double kAlphaFloor = 1e-10;

/// Encoder weights and the combined codebook. Biases are stored as 1×n
/// matrices so every group can be handled uniformly. Rows [i·K, (i+1)·K) of
/// A are codebook i.
template <typename Scalar>
struct ModelParams {
    Mat<Scalar> theta;        // H × M·K/2
    Mat<Scalar> b;            // 1 × M·K/2
    Mat<Scalar> theta_prime;  // M·K/2 × M·K
    Mat<Scalar> b_prime;      // 1 × M·K
    Mat<Scalar> A;            // M·K × H

    static constexpr std::array<std::string_view, 5> kGroupNames = {
        "theta", "b", "theta_prime", "b_prime", "A"};

    static ModelParams zeros(const SchemeConfig& cfg) {
        const Eigen::Index h = cfg.H, hid = cfg.hidden(), mk = cfg.num_codewords();
        return {Mat<Scalar>::Zero(h, hid), Mat<Scalar>::Zero(1, hid),
                Mat<Scalar>::Zero(hid, mk), Mat<Scalar>::Zero(1, mk),
                Mat<Scalar>::Zero(mk, h)};
    }

    std::array<Mat<Scalar>*, 5> groups() { return {&theta, &b, &theta_prime, &b_prime, &A}; }
    std::array<const Mat<Scalar>*, 5> groups() const {
        return {&theta, &b, &theta_prime, &b_prime, &A};
    }

    template <typename Other>
    ModelParams<Other> cast() const {
        return {theta.template cast<Other>(), b.template cast<Other>(),
                theta_prime.template cast<Other>(), b_prime.template cast<Other>(),
                A.template cast<Other>()};
    }

    bool operator==(const ModelParams&) const = default;
};

template <typename Scalar>
using Gradients = ModelParams<Scalar>;

/// Throws ConfigError unless every group has the shape `cfg` implies.
template <typename Scalar>
void check_shapes(const ModelParams<Scalar>& p, const SchemeConfig& cfg) {
    const auto ref = ModelParams<Scalar>::zeros(cfg);
    const auto want = ref.groups();
    const auto have = p.groups();
    for (std::size_t g = 0; g < want.size(); ++g) {
        if (want[g]->rows() != have[g]->rows() || want[g]->cols() != have[g]->cols()) {
            throw ConfigError("params: group " + std::string(ModelParams<Scalar>::kGroupNames[g]) +
                              " is " + std::to_string(have[g]->rows()) + "x" +
                              std::to_string(have[g]->cols()) + ", expected " +
                              std::to_string(want[g]->rows()) + "x" +
                              std::to_string(want[g]->cols()));
        }
    }
}

/// Soft runs the Gumbel-softmax relaxation; Hard replaces each d slice by
/// the one-hot of its argmax, which is what exported codes reconstruct.
enum class ForwardMode { Soft, Hard };

/// Intermediates of one forward pass, kept for backward.
template <typename Scalar>
struct ForwardTrace {
    Mat<Scalar> h;          // B × M·K/2, tanh activations
    Mat<Scalar> pre_alpha;  // B × M·K, softplus inputs
    Mat<Scalar> alpha;      // B × M·K, floored softplus outputs
    Mat<Scalar> d;          // B × M·K, one (soft) one-hot per K-slice
    Mat<Scalar> recon;      // B × H
    double loss = 0.0;
    ForwardMode mode = ForwardMode::Soft;
};

namespace detail {

/// Runs `f`, prefixing any NumericError with the forward stage name.
template <typename F>
decltype(auto) at_stage(const char* stage, F&& f) {
    try {
        return f();
    } catch (const NumericError& e) {
        throw NumericError(std::string("forward: ") + stage + ": " + e.what());
    }
}

template <typename Scalar>
void add_row_bias(Mat<Scalar>& m, const Mat<Scalar>& bias) {
    m.rowwise() += bias.row(0);
}

/// Column sums accumulated in double, rows in ascending order.
template <typename Scalar>
Mat<Scalar> column_sums(const Mat<Scalar>& m) {
    Eigen::Matrix<double, 1, Eigen::Dynamic> acc = Eigen::Matrix<double, 1, Eigen::Dynamic>::Zero(m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) acc += m.row(r).template cast<double>();
    return acc.template cast<Scalar>();
}

} // namespace detail

/// Index of the largest entry, ties resolved toward the smallest index.
template <typename Derived>
Eigen::Index argmax_first(const Eigen::MatrixBase<Derived>& v) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < v.size(); ++k) {
        if (v(k) > v(best)) best = k;
    }
    return best;
}

/// softmax(logits / tau) over one slice, max-subtracted.
template <typename Scalar, typename In, typename Out>
void softmax_slice(const Eigen::MatrixBase<In>& logits, Scalar tau, Eigen::MatrixBase<Out>& out) {
    const Scalar mx = logits.maxCoeff();
    Scalar sum = 0;
    for (Eigen::Index k = 0; k < logits.size(); ++k) {
        const Scalar e = std::exp((logits(k) - mx) / tau);
        out(k) = e;
        sum += e;
    }
    out /= sum;
}

/// Forward pass over a B×H batch. `noise` is B × M·K Gumbel noise, or an
/// empty matrix for the noise-free path.
template <typename Scalar>
ForwardTrace<Scalar> forward(const ModelParams<Scalar>& params, const Mat<Scalar>& batch,
                             const Mat<Scalar>& noise, const SchemeConfig& cfg,
                             ForwardMode mode = ForwardMode::Soft) {
    cfg.validate();
    check_shapes(params, cfg);
    const Eigen::Index B = batch.rows();
    const Eigen::Index K = cfg.K, M = cfg.M, MK = cfg.num_codewords();
    if (batch.cols() != static_cast<Eigen::Index>(cfg.H)) {
        throw ConfigError("forward: batch has " + std::to_string(batch.cols()) +
                          " columns, scheme H is " + std::to_string(cfg.H));
    }
    const bool noisy = noise.size() != 0;
    if (noisy && (noise.rows() != B || noise.cols() != MK)) {
        throw ConfigError("forward: noise must be " + std::to_string(B) + "x" +
                          std::to_string(MK));
    }

    ForwardTrace<Scalar> tr;
    tr.mode = mode;

    tr.h = detail::at_stage("hidden layer", [&] { return matmul(batch, params.theta); });
    detail::add_row_bias(tr.h, params.b);
    tr.h = tr.h.array().tanh().matrix();
    require_finite(tr.h, "forward: hidden layer");

    tr.pre_alpha = detail::at_stage("alpha", [&] { return matmul(tr.h, params.theta_prime); });
    detail::add_row_bias(tr.pre_alpha, params.b_prime);
    const Scalar floor = static_cast<Scalar>(kAlphaFloor);
    tr.alpha = tr.pre_alpha.unaryExpr([floor](Scalar x) {
        const Scalar a = softplus(x);
        return a < floor ? floor : a;
    });
    require_finite(tr.alpha, "forward: alpha");

    const Scalar tau = static_cast<Scalar>(cfg.tau);
    tr.d.resize(B, MK);
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> logits(K);
    for (Eigen::Index r = 0; r < B; ++r) {
        for (Eigen::Index i = 0; i < M; ++i) {
            auto a = tr.alpha.row(r).segment(i * K, K);
            auto out = tr.d.row(r).segment(i * K, K);
            if (mode == ForwardMode::Hard) {
                out.setZero();
                const Eigen::Index k =
                    noisy ? argmax_first((a.array().log() + noise.row(r).segment(i * K, K).array()).matrix())
                          : argmax_first(a);
                out(k) = Scalar(1);
                continue;
            }
            logits = a.array().log().matrix();
            if (noisy) logits += noise.row(r).segment(i * K, K);
            softmax_slice(logits, tau, out);
        }
    }
    require_finite(tr.d, "forward: gumbel-softmax");

    tr.recon = detail::at_stage("reconstruction", [&] { return matmul(tr.d, params.A); });

    double total = 0.0;
    for (Eigen::Index r = 0; r < B; ++r) {
        for (Eigen::Index c = 0; c < batch.cols(); ++c) {
            const double diff = static_cast<double>(tr.recon(r, c)) - static_cast<double>(batch(r, c));
            total += diff * diff;
        }
    }
    tr.loss = B > 0 ? total / static_cast<double>(B) : 0.0;
    if (!std::isfinite(tr.loss)) throw NumericError("forward: loss is not finite");
    return tr;
}

/// Analytic gradient of the mean loss, back through the soft Gumbel-softmax
/// (reparameterization path). The trace must come from a Soft forward on the
/// same inputs.
template <typename Scalar>
Gradients<Scalar> backward(const ModelParams<Scalar>& params, const Mat<Scalar>& batch,
                           const SchemeConfig& cfg, const ForwardTrace<Scalar>& tr) {
    if (tr.mode != ForwardMode::Soft) {
        throw ConfigError("backward: hard-mode trace has no gradient");
    }
    const Eigen::Index B = batch.rows();
    const Eigen::Index K = cfg.K, M = cfg.M;
    Gradients<Scalar> g;
    if (B == 0) return Gradients<Scalar>::zeros(cfg);

    const Mat<Scalar> d_recon = ((tr.recon - batch) * static_cast<Scalar>(2.0 / static_cast<double>(B))).eval();
    g.A = matmul_tn(tr.d, d_recon);
    const Mat<Scalar> d_d = matmul_nt(d_recon, params.A);

    // Through softmax, then log α / τ, then the floor and softplus.
    const Scalar inv_tau = static_cast<Scalar>(1.0 / cfg.tau);
    const Scalar floor = static_cast<Scalar>(kAlphaFloor);
    Mat<Scalar> d_pre_alpha(B, cfg.num_codewords());
    for (Eigen::Index r = 0; r < B; ++r) {
        for (Eigen::Index i = 0; i < M; ++i) {
            const auto dv = tr.d.row(r).segment(i * K, K);
            const auto gv = d_d.row(r).segment(i * K, K);
            const Scalar dot = dv.dot(gv);
            for (Eigen::Index k = 0; k < K; ++k) {
                const Eigen::Index c = i * K + k;
                const Scalar x = tr.pre_alpha(r, c);
                if (softplus(x) < floor) {
                    d_pre_alpha(r, c) = Scalar(0);
                    continue;
                }
                const Scalar d_logit = dv(k) * (gv(k) - dot) * inv_tau;
                d_pre_alpha(r, c) = d_logit * softplus_grad(x) / tr.alpha(r, c);
            }
        }
    }

    g.theta_prime = matmul_tn(tr.h, d_pre_alpha);
    g.b_prime = detail::column_sums(d_pre_alpha);

    Mat<Scalar> d_pre_h = matmul_nt(d_pre_alpha, params.theta_prime);
    d_pre_h.array() *= (Scalar(1) - tr.h.array().square());

    g.theta = matmul_tn(batch, d_pre_h);
    g.b = detail::column_sums(d_pre_h);

    for (const auto* grp : g.groups()) require_finite(*grp, "backward");
    return g;
}

/// Mean loss without keeping the trace.
template <typename Scalar>
double evaluate_loss(const ModelParams<Scalar>& params, const Mat<Scalar>& batch,
                     const SchemeConfig& cfg, ForwardMode mode = ForwardMode::Soft) {
    return forward(params, batch, Mat<Scalar>(), cfg, mode).loss;
}

/// Adam optimizer state; moment buffers mirror ModelParams.
struct AdamState {
    ModelParams<float> m;
    ModelParams<float> v;
    std::uint64_t t = 0;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState for_scheme(const SchemeConfig& cfg, double lr = 1e-4) {
        AdamState s;
        s.m = ModelParams<float>::zeros(cfg);
        s.v = ModelParams<float>::zeros(cfg);
        s.lr = lr;
        return s;
    }
};

/// One bias-corrected Adam update of `params` in place; increments state.t.
void adam_step(ModelParams<float>& params, const Gradients<float>& grads, AdamState& state);

/// Glorot-uniform encoder weights, zero biases, codebook entries
/// Uniform(±sqrt(6/(M·K + H))). Draw order: theta, theta_prime, A.
ModelParams<float> init_params(const SchemeConfig& cfg, Rng& rng);

/// One code per row: component i is argmax of its α slice (noise == empty)
/// or of log α + noise. Ties go to the smallest index.
Eigen::Matrix<std::uint32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
hard_codes(const MatF& alpha, const MatF& noise, const SchemeConfig& cfg);

} // namespace codecomp
