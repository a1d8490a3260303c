#include <gtest/gtest.h>

#include "codecomp/checkpoint.hpp"
#include "codecomp/synthetic.hpp"
#include "codecomp/trainer.hpp"

using namespace codecomp;

namespace {

TrainConfig small_config(std::uint64_t iterations, std::uint64_t validate_every, std::uint64_t seed = 1) {
    TrainConfig tc;
    tc.scheme = SchemeConfig{2, 4, 6, 1.0};
    tc.batch_size = 16;
    tc.lr = 1e-2;
    tc.iterations = iterations;
    tc.validate_every = validate_every;
    tc.seed = seed;
    return tc;
}

const CompositionalData& small_data() {
    static const CompositionalData d = make_compositional_data(2, 4, 6, 200, 0.05, 3);
    return d;
}

} // namespace

TEST(Split, FivePercentOfThousand) {
    TrainConfig tc;
    Rng rng(1);
    const auto s = split_validation(1000, tc, rng);
    EXPECT_EQ(s.val.size(), 50u);
    EXPECT_EQ(s.train.size(), 950u);
    std::vector<bool> seen(1000, false);
    for (auto i : s.val) seen[i] = true;
    for (auto i : s.train) {
        EXPECT_FALSE(seen[i]);
        seen[i] = true;
    }
    EXPECT_EQ(std::count(seen.begin(), seen.end(), true), 1000);
}

TEST(Split, SameSeedSameSplit) {
    TrainConfig tc;
    Rng a(42), b(42), c(43);
    const auto sa = split_validation(500, tc, a);
    const auto sb = split_validation(500, tc, b);
    const auto sc = split_validation(500, tc, c);
    EXPECT_EQ(sa.val, sb.val);
    EXPECT_EQ(sa.train, sb.train);
    EXPECT_NE(sa.val, sc.val);
}

TEST(Split, CapAndFloor) {
    TrainConfig tc;
    Rng rng(2);
    EXPECT_EQ(split_validation(100000, tc, rng).val.size(), 3000u);
    EXPECT_EQ(split_validation(40, tc, rng).val.size(), 10u);
    EXPECT_THROW(split_validation(19, tc, rng), ConfigError);
}

TEST(Train, ZeroIterationsReturnsInitialization) {
    const auto tc = small_config(0, 10);
    const auto res = train(small_data().emb, tc);
    EXPECT_TRUE(res.report.val_loss_history.empty());
    EXPECT_EQ(res.report.iterations_run, 0u);

    Rng master(tc.seed);
    master.split();
    Rng init_rng = master.split();
    EXPECT_EQ(res.params, init_params(tc.scheme, init_rng));
}

TEST(Train, HistoryCadenceIsExact) {
    const auto res = train(small_data().emb, small_config(100, 7));
    ASSERT_EQ(res.report.val_loss_history.size(), 14u);
    for (std::size_t i = 0; i < 14; ++i) EXPECT_EQ(res.report.val_loss_history[i].iteration, 7 * (i + 1));
    EXPECT_EQ(res.report.iterations_run, 100u);
}

TEST(Train, BitExactDeterminism) {
    const auto a = train(small_data().emb, small_config(200, 20, 5));
    const auto b = train(small_data().emb, small_config(200, 20, 5));
    const auto c = train(small_data().emb, small_config(200, 20, 6));
    EXPECT_EQ(encode_checkpoint({small_config(0, 1).scheme, a.params, 0}),
              encode_checkpoint({small_config(0, 1).scheme, b.params, 0}));
    EXPECT_FALSE(a.params == c.params);
}

TEST(Train, ReturnsBestValidatedParameters) {
    const auto tc = small_config(400, 10, 7);
    std::vector<ModelParams<float>> improved_params;
    const auto res = train(small_data().emb, tc, [&](const ValidationPoint&, bool improved, const ModelParams<float>& p) {
        if (improved) improved_params.push_back(p);
    });
    double min_loss = std::numeric_limits<double>::infinity();
    for (const auto& p : res.report.val_loss_history) min_loss = std::min(min_loss, p.loss);
    EXPECT_EQ(res.report.best_val_loss, min_loss);
    ASSERT_FALSE(improved_params.empty());
    EXPECT_EQ(improved_params.back(), res.params);

    // recompute on the same validation split: the returned params reproduce the best loss
    Rng master(tc.seed);
    Rng split_rng = master.split();
    const auto split = split_validation(small_data().emb.size(), tc, split_rng);
    MatF val(static_cast<Eigen::Index>(split.val.size()), 6);
    for (std::size_t i = 0; i < split.val.size(); ++i) val.row(Eigen::Index(i)) = small_data().emb.matrix.row(Eigen::Index(split.val[i]));
    const double again = dataset_loss(res.params, val, tc.scheme);
    EXPECT_EQ(again, res.report.best_val_loss);
    for (const auto& p : res.report.val_loss_history) EXPECT_LE(again, p.loss);
}

TEST(Train, ValidationDoesNotPerturbTrajectory) {
    // The loss at iteration 120 must not depend on how often we validated before it.
    const auto a = train(small_data().emb, small_config(120, 120, 9));
    const auto b = train(small_data().emb, small_config(120, 6, 9));
    ASSERT_EQ(b.report.val_loss_history.back().iteration, 120u);
    EXPECT_EQ(a.report.val_loss_history.back().loss, b.report.val_loss_history.back().loss);
}

TEST(Train, ThreadedModeIsDeterministicAndClose) {
    auto tc = small_config(100, 50, 11);
    tc.threads = 4;
    const auto a = train(small_data().emb, tc);
    const auto b = train(small_data().emb, tc);
    EXPECT_TRUE(a.params == b.params);
    tc.threads = 1;
    const auto ref = train(small_data().emb, tc);
    EXPECT_NEAR(a.report.best_val_loss, ref.report.best_val_loss, 1e-3 * ref.report.best_val_loss);
}

TEST(Train, LearnsSmallCompositionalData) {
    auto tc = small_config(3000, 500, 2);
    const auto res = train(small_data().emb, tc);
    const auto init = train(small_data().emb, small_config(0, 500, 2));
    const double before = dataset_loss(init.params, small_data().emb.matrix, tc.scheme);
    EXPECT_LT(res.report.best_val_loss, 0.5 * before);
}

TEST(Train, ConfigErrors) {
    auto tc = small_config(5, 10);
    EXPECT_THROW(train(small_data().emb, tc), ConfigError);
    tc = small_config(10, 10);
    tc.scheme.H = 7;
    EXPECT_THROW(train(small_data().emb, tc), ConfigError);
    tc = small_config(10, 10);
    tc.lr = 0;
    EXPECT_THROW(train(small_data().emb, tc), ConfigError);
}

TEST(Train, DivergenceIsNumericError) {
    auto tc = small_config(50, 10);
    EmbeddingMatrix emb = small_data().emb;
    emb.matrix.setConstant(3e38f);  // the encoder's first matmul overflows float
    try {
        train(emb, tc);
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos) << e.what();
    }
}

TEST(Checkpoint, RoundTripAndCorruption) {
    const SchemeConfig cfg{3, 4, 5, 1.0};
    Rng rng(3);
    const Checkpoint ck{cfg, init_params(cfg, rng), 1234};
    const Bytes b = encode_checkpoint(ck);
    EXPECT_EQ(b.size(), 4u + 1u + 12u + 4u * (5 * 6 + 6 + 6 * 12 + 12 + 12 * 5) + 8u);
    const auto back = decode_checkpoint(b);
    EXPECT_EQ(back.params, ck.params);
    EXPECT_EQ(back.iteration, 1234u);
    EXPECT_EQ(back.scheme.M, 3u);
    EXPECT_EQ(encode_checkpoint(back), b);

    EXPECT_THROW(decode_checkpoint(Bytes(b.begin(), b.end() - 1)), DataError);
    Bytes bad = b;
    bad[9] = 3;  // K = 3 is not a power of two
    EXPECT_THROW(decode_checkpoint(bad), DataError);
    Bytes nan = b;
    nan[17] = 0xFF;
    nan[18] = 0xFF;
    nan[19] = 0xFF;
    nan[20] = 0x7F;
    EXPECT_THROW(decode_checkpoint(nan), DataError);
}
