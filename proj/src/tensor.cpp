#include "codecomp/tensor.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

namespace codecomp {

namespace detail {

void throw_shape(const char* op, Eigen::Index ar, Eigen::Index ac, Eigen::Index br,
                 Eigen::Index bc) {
    std::ostringstream os;
    os << op << ": shape mismatch " << ar << "x" << ac << " vs " << br << "x" << bc;
    throw ConfigError(os.str());
}

} // namespace detail

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw ConfigError("Rng::below: empty range");
    // Largest multiple of n representable; draws at or above it are rejected.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double gumbel_from_uniform(double u) {
    u = std::clamp(u, kGumbelEps, 1.0 - kGumbelEps);
    // 1 - 1e-20 rounds to 1 in double, so the inner term needs its own floor.
    const double t = std::max(-std::log(u), kGumbelEps);
    return -std::log(t);
}

MatF sample_gumbel(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    MatF out(rows, cols);
    float* p = out.data();
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        p[i] = static_cast<float>(gumbel_from_uniform(rng.uniform()));
    }
    return out;
}

MatF uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double bound) {
    MatF out(rows, cols);
    float* p = out.data();
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        p[i] = static_cast<float>(rng.uniform(-bound, bound));
    }
    return out;
}

} // namespace codecomp
