#include "codecomp/code_model.hpp"

#include <cmath>

namespace codecomp {

void adam_step(ModelParams<float>& params, const Gradients<float>& grads, AdamState& state) {
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double bias1 = 1.0 - std::pow(state.beta1, t);
    const double bias2 = 1.0 - std::pow(state.beta2, t);

    auto p = params.groups();
    auto m = state.m.groups();
    auto v = state.v.groups();
    const auto g = grads.groups();
    for (std::size_t grp = 0; grp < p.size(); ++grp) {
        if (p[grp]->size() != g[grp]->size() || p[grp]->size() != m[grp]->size()) {
            throw ConfigError("adam_step: shape mismatch in group " +
                              std::string(ModelParams<float>::kGroupNames[grp]));
        }
        float* pp = p[grp]->data();
        float* mp = m[grp]->data();
        float* vp = v[grp]->data();
        const float* gp = g[grp]->data();
        for (Eigen::Index i = 0; i < p[grp]->size(); ++i) {
            const double gi = gp[i];
            const double mi = state.beta1 * mp[i] + (1.0 - state.beta1) * gi;
            const double vi = state.beta2 * vp[i] + (1.0 - state.beta2) * gi * gi;
            mp[i] = static_cast<float>(mi);
            vp[i] = static_cast<float>(vi);
            const double step = state.lr * (mi / bias1) / (std::sqrt(vi / bias2) + state.eps);
            pp[i] = static_cast<float>(pp[i] - step);
        }
    }
}

ModelParams<float> init_params(const SchemeConfig& cfg, Rng& rng) {
    cfg.validate();
    const Eigen::Index h = cfg.H, hid = cfg.hidden(), mk = cfg.num_codewords();
    auto glorot = [](Eigen::Index fan_in, Eigen::Index fan_out) {
        return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    };
    ModelParams<float> p;
    p.theta = uniform_matrix(rng, h, hid, glorot(h, hid));
    p.b = MatF::Zero(1, hid);
    p.theta_prime = uniform_matrix(rng, hid, mk, glorot(hid, mk));
    p.b_prime = MatF::Zero(1, mk);
    p.A = uniform_matrix(rng, mk, h, glorot(mk, h));
    return p;
}

Eigen::Matrix<std::uint32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
hard_codes(const MatF& alpha, const MatF& noise, const SchemeConfig& cfg) {
    const Eigen::Index K = cfg.K, M = cfg.M;
    if (alpha.cols() != M * K) throw ConfigError("hard_codes: alpha width does not match scheme");
    const bool noisy = noise.size() != 0;
    if (noisy && (noise.rows() != alpha.rows() || noise.cols() != alpha.cols())) {
        throw ConfigError("hard_codes: noise shape does not match alpha");
    }
    Eigen::Matrix<std::uint32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> codes(alpha.rows(), M);
    for (Eigen::Index r = 0; r < alpha.rows(); ++r) {
        for (Eigen::Index i = 0; i < M; ++i) {
            const auto a = alpha.row(r).segment(i * K, K);
            const Eigen::Index k =
                noisy ? argmax_first((a.array().log() + noise.row(r).segment(i * K, K).array()).matrix())
                      : argmax_first(a);
            codes(r, i) = static_cast<std::uint32_t>(k);
        }
    }
    return codes;
}

} // namespace codecomp
