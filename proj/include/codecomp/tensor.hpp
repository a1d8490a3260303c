#pragma once

// Dense row-major matrices, the handful of kernels the code learner needs,
// and the seeded generator used for Gumbel noise and initialization.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "codecomp/errors.hpp"

namespace codecomp {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatF = Mat<float>;
using MatD = Mat<double>;

namespace detail {

[[noreturn]] void throw_shape(const char* op, Eigen::Index ar, Eigen::Index ac,
                              Eigen::Index br, Eigen::Index bc);

template <typename Derived>
void check_result(const Eigen::MatrixBase<Derived>& m, const char* op) {
    if (!m.allFinite()) throw NumericError(std::string(op) + ": non-finite result");
}

template <typename Scalar>
struct Accumulator {
    using type = double;
};

template <>
struct Accumulator<long double> {
    using type = long double;
};

} // namespace detail

/// Matrix product with 64-bit accumulation. Every output entry is the sum
/// over the inner index in ascending order, so results do not depend on
/// Eigen's blocking or vectorization choices.
template <typename Scalar>
Mat<Scalar> matmul(const Mat<Scalar>& a, const Mat<Scalar>& b) {
    if (a.cols() != b.rows()) {
        detail::throw_shape("matmul", a.rows(), a.cols(), b.rows(), b.cols());
    }
    using Acc = typename detail::Accumulator<Scalar>::type;
    const Eigen::Index n = a.rows(), inner = a.cols(), m = b.cols();
    Mat<Scalar> out(n, m);
    Eigen::Matrix<Acc, 1, Eigen::Dynamic> acc(m);
    for (Eigen::Index i = 0; i < n; ++i) {
        acc.setZero();
        for (Eigen::Index k = 0; k < inner; ++k) {
            const Acc aik = static_cast<Acc>(a(i, k));
            if (aik == Acc(0)) continue;
            const Scalar* brow = b.data() + k * m;
            Acc* dst = acc.data();
            for (Eigen::Index j = 0; j < m; ++j) dst[j] += aik * static_cast<Acc>(brow[j]);
        }
        out.row(i) = acc.template cast<Scalar>();
    }
    detail::check_result(out, "matmul");
    return out;
}

/// aᵀ·b without materializing the transpose.
template <typename Scalar>
Mat<Scalar> matmul_tn(const Mat<Scalar>& a, const Mat<Scalar>& b) {
    if (a.rows() != b.rows()) {
        detail::throw_shape("matmul_tn", a.cols(), a.rows(), b.rows(), b.cols());
    }
    using Acc = typename detail::Accumulator<Scalar>::type;
    const Eigen::Index n = a.cols(), inner = a.rows(), m = b.cols();
    Mat<Acc> acc = Mat<Acc>::Zero(n, m);
    for (Eigen::Index k = 0; k < inner; ++k) {
        const Scalar* arow = a.data() + k * n;
        const Scalar* brow = b.data() + k * m;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Acc aki = static_cast<Acc>(arow[i]);
            if (aki == Acc(0)) continue;
            Acc* dst = acc.data() + i * m;
            for (Eigen::Index j = 0; j < m; ++j) dst[j] += aki * static_cast<Acc>(brow[j]);
        }
    }
    Mat<Scalar> out = acc.template cast<Scalar>();
    detail::check_result(out, "matmul_tn");
    return out;
}

/// a·bᵀ without materializing the transpose.
template <typename Scalar>
Mat<Scalar> matmul_nt(const Mat<Scalar>& a, const Mat<Scalar>& b) {
    if (a.cols() != b.cols()) {
        detail::throw_shape("matmul_nt", a.rows(), a.cols(), b.cols(), b.rows());
    }
    using Acc = typename detail::Accumulator<Scalar>::type;
    const Eigen::Index n = a.rows(), inner = a.cols(), m = b.rows();
    Mat<Scalar> out(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar* arow = a.data() + i * inner;
        for (Eigen::Index j = 0; j < m; ++j) {
            const Scalar* brow = b.data() + j * inner;
            Acc s = 0;
            for (Eigen::Index k = 0; k < inner; ++k) {
                s += static_cast<Acc>(arow[k]) * static_cast<Acc>(brow[k]);
            }
            out(i, j) = static_cast<Scalar>(s);
        }
    }
    detail::check_result(out, "matmul_nt");
    return out;
}

/// log(1 + eˣ); returns x itself above 30 where the correction is below
/// float resolution.
template <typename Scalar>
Scalar softplus(Scalar x) {
    using std::exp;
    using std::log1p;
    if (x > Scalar(30)) return x;
    return log1p(exp(x));
}

/// d/dx softplus(x), i.e. the logistic sigmoid.
template <typename Scalar>
Scalar softplus_grad(Scalar x) {
    using std::exp;
    if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
    const Scalar e = exp(x);
    return e / (Scalar(1) + e);
}

enum class UnaryOp { Tanh, Softplus, Exp, Log };
enum class BinaryOp { Add, Sub, Mul };

template <typename Scalar>
Mat<Scalar> elementwise(UnaryOp op, const Mat<Scalar>& a) {
    Mat<Scalar> out;
    switch (op) {
    case UnaryOp::Tanh:
        out = a.array().tanh().matrix();
        break;
    case UnaryOp::Softplus:
        out = a.unaryExpr([](Scalar x) { return softplus(x); });
        break;
    case UnaryOp::Exp:
        out = a.array().exp().matrix();
        break;
    case UnaryOp::Log:
        out = a.array().log().matrix();
        break;
    }
    detail::check_result(out, "elementwise");
    return out;
}

template <typename Scalar>
Mat<Scalar> elementwise(BinaryOp op, const Mat<Scalar>& a, const Mat<Scalar>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        detail::throw_shape("elementwise", a.rows(), a.cols(), b.rows(), b.cols());
    }
    Mat<Scalar> out;
    switch (op) {
    case BinaryOp::Add:
        out = a + b;
        break;
    case BinaryOp::Sub:
        out = a - b;
        break;
    case BinaryOp::Mul:
        out = a.cwiseProduct(b);
        break;
    }
    detail::check_result(out, "elementwise");
    return out;
}

template <typename Scalar>
Mat<Scalar> scale(const Mat<Scalar>& a, Scalar c) {
    Mat<Scalar> out = a * c;
    detail::check_result(out, "scale");
    return out;
}

/// True when every entry is finite.
template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

/// Throws NumericError naming `stage` if `m` holds a NaN or Inf.
template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const std::string& stage) {
    if (!m.allFinite()) throw NumericError("non-finite value in " + stage);
}

/// Seedable generator. Backed by std::mt19937_64, whose output sequence is
/// fixed by the C++ standard; uniforms are formed from the top 53 bits so
/// the stream is identical across standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }
    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via Box-Muller; one draw consumes two uniforms.
    double normal();

    /// Independent child generator; consumes one draw from this one.
    Rng split() { return Rng(engine_() ^ 0x9E3779B97F4A7C15ULL); }

private:
    std::mt19937_64 engine_;
};

/// Clamp bound used when mapping uniforms to Gumbel noise.
inline constexpr double kGumbelEps = 1e-20;

/// −log(−log(u)) with u clamped to [ε, 1−ε] and the inner −log(u) held at
/// least ε, so u = 0 and u = 1 both give finite values.
double gumbel_from_uniform(double u);

/// rows × cols matrix of independent Gumbel(0, 1) draws.
MatF sample_gumbel(Rng& rng, Eigen::Index rows, Eigen::Index cols);

/// Entries i.i.d. Uniform(−bound, bound), drawn in row-major order.
MatF uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double bound);

} // namespace codecomp
