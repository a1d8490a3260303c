#include "codecomp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace codecomp {

SizeReport size_report(const SchemeConfig& scheme, std::uint64_t vocab_size) {
    scheme.validate();
    SizeReport s;
    s.M = scheme.M;
    s.K = scheme.K;
    s.H = scheme.H;
    s.vocab_size = vocab_size;
    s.num_vectors = static_cast<std::uint64_t>(scheme.M) * scheme.K;
    s.vector_bytes = s.num_vectors * scheme.H * 4;
    s.code_bits_per_word = scheme.bits_per_code();
    s.code_bytes_exact = (vocab_size * s.code_bits_per_word + 7) / 8;
    s.code_bytes_aligned = vocab_size * ((s.code_bits_per_word + 7) / 8);
    s.total_bytes_exact = s.vector_bytes + s.code_bytes_exact;
    s.total_bytes_aligned = s.vector_bytes + s.code_bytes_aligned;
    s.baseline_bytes = vocab_size * scheme.H * 4;
    s.compression_ratio = s.total_bytes_exact == 0
                              ? 0.0
                              : static_cast<double>(s.baseline_bytes) / static_cast<double>(s.total_bytes_exact);
    s.binary_code_bits = s.num_vectors / 2;
    return s;
}

Report to_report(const SizeReport& s) {
    auto mb = [](std::uint64_t bytes) { return format_double(static_cast<double>(bytes) / 1e6); };
    Report r("storage for " + std::to_string(s.M) + "x" + std::to_string(s.K) + " coding, H=" +
             std::to_string(s.H) + ", |V|=" + std::to_string(s.vocab_size));
    r.add("M", s.M)
        .add("K", s.K)
        .add("H", s.H)
        .add("vocab_size", s.vocab_size)
        .add("num_vectors", s.num_vectors)
        .add("vector_bytes", s.vector_bytes)
        .add("vector_mb", mb(s.vector_bytes))
        .add("code_bits_per_word", s.code_bits_per_word)
        .add("code_bytes_exact", s.code_bytes_exact)
        .add("code_bytes_aligned", s.code_bytes_aligned)
        .add("code_mb_exact", mb(s.code_bytes_exact))
        .add("total_bytes_exact", s.total_bytes_exact)
        .add("total_bytes_aligned", s.total_bytes_aligned)
        .add("total_mb_exact", mb(s.total_bytes_exact))
        .add("baseline_bytes", s.baseline_bytes)
        .add("baseline_mb", mb(s.baseline_bytes))
        .add("compression_ratio", s.compression_ratio)
        .add("binary_code_bits_same_vectors", s.binary_code_bits);
    r.note("MB = 10^6 bytes; byte counts are raw and uncompressed, so they differ from "
           "sizes of compressed array dumps");
    r.note("aligned figures pad each word's code to a whole byte (code file layout)");
    return r;
}

BalanceTable balance_table(const CodeMatrix& codes) {
    codes.validate();
    BalanceTable t;
    t.counts.setZero(codes.M, codes.K);
    for (Eigen::Index w = 0; w < codes.codes.rows(); ++w) {
        for (Eigen::Index i = 0; i < codes.codes.cols(); ++i) ++t.counts(i, codes.codes(w, i));
    }
    t.min_count = t.counts.minCoeff();
    t.max_count = t.counts.maxCoeff();
    t.dead_codewords = static_cast<std::uint64_t>((t.counts.array() == 0).count());
    const double total = static_cast<double>(codes.vocab_size());
    for (Eigen::Index i = 0; i < t.counts.rows(); ++i) {
        double h = 0.0;
        for (Eigen::Index k = 0; k < t.counts.cols(); ++k) {
            if (t.counts(i, k) == 0) continue;
            const double p = static_cast<double>(t.counts(i, k)) / total;
            h -= p * std::log2(p);
        }
        t.entropy_bits.push_back(h);
    }
    return t;
}

Report to_report(const BalanceTable& t) {
    Report r("code balance");
    r.add("components", static_cast<std::uint64_t>(t.counts.rows()))
        .add("codewords_per_component", static_cast<std::uint64_t>(t.counts.cols()))
        .add("min_count", t.min_count)
        .add("max_count", t.max_count)
        .add("dead_codewords", t.dead_codewords);
    for (std::size_t i = 0; i < t.entropy_bits.size(); ++i) {
        r.add("entropy_bits_" + std::to_string(i), t.entropy_bits[i]);
    }
    return r;
}

std::string to_csv(const BalanceTable& t) {
    std::ostringstream os;
    for (Eigen::Index i = 0; i < t.counts.rows(); ++i) {
        for (Eigen::Index k = 0; k < t.counts.cols(); ++k) {
            if (k) os << ',';
            os << t.counts(i, k);
        }
        os << '\n';
    }
    return os.str();
}

namespace {

std::map<std::vector<std::uint32_t>, std::vector<std::size_t>> group_by_code(const CodeMatrix& codes) {
    std::map<std::vector<std::uint32_t>, std::vector<std::size_t>> groups;
    std::vector<std::uint32_t> key(codes.M);
    for (Eigen::Index w = 0; w < codes.codes.rows(); ++w) {
        for (std::uint32_t i = 0; i < codes.M; ++i) key[i] = codes.codes(w, i);
        groups[key].push_back(static_cast<std::size_t>(w));
    }
    return groups;
}

} // namespace

std::vector<SharedCodeGroup> shared_code_groups(const CodeMatrix& codes, const std::vector<std::string>& vocab) {
    codes.validate();
    if (!vocab.empty() && vocab.size() != codes.vocab_size()) {
        throw DataError("shared: vocabulary size does not match code count");
    }
    std::vector<SharedCodeGroup> out;
    for (auto& [code, members] : group_by_code(codes)) {
        if (members.size() < 2) continue;
        SharedCodeGroup g;
        g.code = code;
        g.indices = members;
        for (auto idx : members) {
            if (!vocab.empty()) g.words.push_back(vocab[idx]);
        }
        out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end(), [](const SharedCodeGroup& a, const SharedCodeGroup& b) {
        if (a.indices.size() != b.indices.size()) return a.indices.size() > b.indices.size();
        return a.indices.front() < b.indices.front();
    });
    return out;
}

std::size_t distinct_codes(const CodeMatrix& codes) { return group_by_code(codes).size(); }

// ---------------------------------------------------------------- k-means

namespace {

double squared_distance(const float* a, const float* b, Eigen::Index dim) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
        const double d = static_cast<double>(a[j]) - static_cast<double>(b[j]);
        s += d * d;
    }
    return s;
}

double squared_distance(const double* a, const double* b, Eigen::Index dim) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

/// Nearest centroid per point (ties to the smaller index); returns the
/// summed squared distance.
double assign(const MatD& points, const MatD& centroids, std::vector<std::uint32_t>& assignment) {
    const Eigen::Index n = points.rows(), dim = points.cols(), k = centroids.rows();
    double total = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t arg = 0;
        for (Eigen::Index c = 0; c < k; ++c) {
            const double d = squared_distance(points.row(p).data(), centroids.row(c).data(), dim);
            if (d < best) {
                best = d;
                arg = static_cast<std::uint32_t>(c);
            }
        }
        assignment[static_cast<std::size_t>(p)] = arg;
        total += best;
    }
    return total;
}

MatD seed_plus_plus(const MatD& points, std::uint32_t k, Rng& rng) {
    const Eigen::Index n = points.rows(), dim = points.cols();
    MatD centroids(k, dim);
    centroids.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index p = 0; p < n; ++p) {
        d2[static_cast<std::size_t>(p)] = squared_distance(points.row(p).data(), centroids.row(0).data(), dim);
    }
    for (std::uint32_t c = 1; c < k; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        Eigen::Index pick = n - 1;
        if (total > 0.0) {
            // D² sampling; zero-distance points are never chosen.
            const double target = rng.uniform() * total;
            double run = 0.0;
            Eigen::Index last_positive = 0;
            for (Eigen::Index p = 0; p < n; ++p) {
                if (d2[static_cast<std::size_t>(p)] <= 0.0) continue;
                last_positive = p;
                run += d2[static_cast<std::size_t>(p)];
                if (run > target) break;
            }
            pick = last_positive;
        } else {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        }
        centroids.row(c) = points.row(pick);
        for (Eigen::Index p = 0; p < n; ++p) {
            auto& d = d2[static_cast<std::size_t>(p)];
            d = std::min(d, squared_distance(points.row(p).data(), centroids.row(c).data(), dim));
        }
    }
    return centroids;
}

} // namespace

KMeansResult kmeans(const MatF& points_f, std::uint32_t k, unsigned max_iterations, Rng& rng) {
    const Eigen::Index n = points_f.rows(), dim = points_f.cols();
    if (k < 1) throw ConfigError("kmeans: k must be >= 1");
    if (n < 1) throw ConfigError("kmeans: no points");
    const MatD points = points_f.cast<double>();

    KMeansResult res;
    MatD centroids = seed_plus_plus(points, k, rng);
    res.assignment.assign(static_cast<std::size_t>(n), 0);
    std::vector<std::uint32_t> previous;

    const double inv_n = 1.0 / static_cast<double>(n);
    for (unsigned iter = 0;; ++iter) {
        const double sse = assign(points, centroids, res.assignment);
        res.loss_history.push_back(sse * inv_n);
        if (iter == max_iterations || res.assignment == previous) break;
        previous = res.assignment;

        MatD sums = MatD::Zero(k, dim);
        std::vector<std::size_t> counts(k, 0);
        for (Eigen::Index p = 0; p < n; ++p) {
            const auto c = res.assignment[static_cast<std::size_t>(p)];
            sums.row(c) += points.row(p);
            ++counts[c];
        }
        for (std::uint32_t c = 0; c < k; ++c) {
            if (counts[c] > 0) centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
        }
        // Empty cluster: move the worst-fit point of the largest cluster into it.
        for (std::uint32_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            const auto largest = static_cast<std::uint32_t>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
            Eigen::Index far = -1;
            double far_d = 0.0;
            for (Eigen::Index p = 0; p < n; ++p) {
                if (res.assignment[static_cast<std::size_t>(p)] != largest) continue;
                const double d = squared_distance(points.row(p).data(), centroids.row(largest).data(), dim);
                if (d > far_d) {
                    far_d = d;
                    far = p;
                }
            }
            if (far < 0) continue;  // every point of the largest cluster sits on its centroid
            centroids.row(c) = points.row(far);
            res.assignment[static_cast<std::size_t>(far)] = c;
            --counts[largest];
            counts[c] = 1;
        }
    }
    res.centroids = centroids.cast<float>();
    res.loss = res.loss_history.back();
    return res;
}

PqResult pq_baseline(const EmbeddingMatrix& emb, std::uint32_t M, std::uint32_t K, unsigned iterations,
                     std::uint64_t seed) {
    const std::uint32_t H = emb.dim();
    if (M < 1 || H % M != 0) {
        throw ConfigError("pq: H = " + std::to_string(H) + " is not divisible by M = " + std::to_string(M));
    }
    if (K < 1 || !is_power_of_two(K)) throw ConfigError("pq: K must be a power of two");
    if (emb.size() == 0) throw ConfigError("pq: empty embedding matrix");
    const Eigen::Index block = H / M;
    const Eigen::Index V = static_cast<Eigen::Index>(emb.size());

    Rng master(seed);
    PqResult out;
    out.books = Codebooks{M, K, MatF::Zero(static_cast<Eigen::Index>(M) * K, H)};
    CodeRows codes(V, M);
    std::vector<std::vector<double>> histories;
    for (std::uint32_t i = 0; i < M; ++i) {
        Rng rng = master.split();
        const MatF sub = emb.matrix.middleCols(static_cast<Eigen::Index>(i) * block, block);
        KMeansResult km = kmeans(sub, K, iterations, rng);
        for (Eigen::Index w = 0; w < V; ++w) codes(w, i) = km.assignment[static_cast<std::size_t>(w)];
        out.books.vectors.block(static_cast<Eigen::Index>(i) * K, static_cast<Eigen::Index>(i) * block, K, block) =
            km.centroids;
        histories.push_back(std::move(km.loss_history));
    }
    out.codes = CodeMatrix(M, K, std::move(codes));

    std::size_t longest = 0;
    for (const auto& h : histories) longest = std::max(longest, h.size());
    out.loss_history.assign(longest, 0.0);
    for (const auto& h : histories) {
        for (std::size_t t = 0; t < longest; ++t) out.loss_history[t] += h[std::min(t, h.size() - 1)];
    }

    const EmbeddingMatrix recon = reconstruct_all(out.codes, out.books);
    out.loss = reconstruction_quality(emb.matrix, recon.matrix).mean_squared_distance;
    return out;
}

// ---------------------------------------------------------------- quality

double cosine(const RowVec<float>& a, const RowVec<float>& b) {
    const auto ad = a.cast<double>();
    const auto bd = b.cast<double>();
    const double na = ad.norm(), nb = bd.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(ad.dot(bd) / (na * nb), -1.0, 1.0);  // rounding can overshoot by an ulp
}

ReconstructionQuality reconstruction_quality(const MatF& original, const MatF& recon) {
    if (original.rows() != recon.rows() || original.cols() != recon.cols()) {
        throw DataError("quality: shapes differ (" + std::to_string(original.rows()) + "x" +
                        std::to_string(original.cols()) + " vs " + std::to_string(recon.rows()) + "x" +
                        std::to_string(recon.cols()) + ")");
    }
    ReconstructionQuality q;
    const Eigen::Index n = original.rows();
    if (n == 0) return q;
    double sq = 0.0, cos_sum = 0.0, cos_min = std::numeric_limits<double>::infinity();
    q.cosine.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index w = 0; w < n; ++w) {
        sq += squared_distance(original.row(w).data(), recon.row(w).data(), original.cols());
        const double c = cosine(original.row(w), recon.row(w));
        q.cosine.push_back(c);
        cos_sum += c;
        cos_min = std::min(cos_min, c);
    }
    q.mean_squared_distance = sq / static_cast<double>(n);
    q.mean_cosine = cos_sum / static_cast<double>(n);
    q.min_cosine = cos_min;
    return q;
}

Report to_report(const ReconstructionQuality& q) {
    Report r("reconstruction quality");
    r.add("words", static_cast<std::uint64_t>(q.cosine.size()))
        .add("mean_squared_distance", q.mean_squared_distance)
        .add("mean_cosine", q.mean_cosine)
        .add("min_cosine", q.min_cosine);
    return r;
}

namespace {

Mat<double> unit_rows(const MatF& m) {
    Mat<double> out = m.cast<double>();
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double n = out.row(r).norm();
        if (n > 0.0) out.row(r) /= n;
    }
    return out;
}

std::vector<std::size_t> top_k_neighbors(const Mat<double>& unit, std::size_t query, std::size_t k) {
    const Eigen::Index V = unit.rows();
    std::vector<std::pair<double, std::size_t>> sims;
    sims.reserve(static_cast<std::size_t>(V) - 1);
    const auto q = unit.row(static_cast<Eigen::Index>(query));
    for (Eigen::Index w = 0; w < V; ++w) {
        if (static_cast<std::size_t>(w) == query) continue;
        sims.emplace_back(q.dot(unit.row(w)), static_cast<std::size_t>(w));
    }
    auto better = [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    };
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end(), better);
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(sims[i].second);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

NeighborOverlap neighbor_overlap(const EmbeddingMatrix& original, const EmbeddingMatrix& recon, std::size_t k,
                                 std::size_t sample, std::uint64_t seed) {
    const std::size_t V = static_cast<std::size_t>(original.matrix.rows());
    if (static_cast<std::size_t>(recon.matrix.rows()) != V) {
        throw DataError("nn-overlap: original has " + std::to_string(V) + " words, reconstruction " +
                        std::to_string(recon.matrix.rows()));
    }
    if (!original.vocab.empty() && !recon.vocab.empty() && original.vocab != recon.vocab) {
        throw DataError("nn-overlap: vocabularies differ in content or order");
    }
    if (k < 1 || k >= V) {
        throw ConfigError("nn-overlap: k = " + std::to_string(k) + " must be in [1, |V|) with |V| = " +
                          std::to_string(V));
    }
    if (sample < 1) throw ConfigError("nn-overlap: sample must be >= 1");

    std::vector<std::size_t> order(V);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(std::min(sample, V));

    const Mat<double> a = unit_rows(original.matrix);
    const Mat<double> b = unit_rows(recon.matrix);
    NeighborOverlap out;
    out.queries = order;
    double total = 0.0;
    for (std::size_t q : order) {
        const auto na = top_k_neighbors(a, q, k);
        const auto nb = top_k_neighbors(b, q, k);
        std::vector<std::size_t> common;
        std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
        const double frac = static_cast<double>(common.size()) / static_cast<double>(k);
        out.per_query.push_back(frac);
        total += frac;
    }
    out.overlap = total / static_cast<double>(order.size());
    return out;
}

} // namespace codecomp
