#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "sgnet/checkpoint.hpp"
#include "sgnet/config.hpp"
#include "sgnet/error.hpp"
#include "sgnet/train.hpp"

using namespace sgnet;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "sgnet_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

ModelConfig tiny_model() {
    ModelConfig c;
    c.channels = 8;
    c.sdb_count = 2;
    c.scale = 2;
    c.res_blocks = 1;
    c.attention_ratio = 4;
    return c;
}

TrainConfig tiny_train() {
    TrainConfig t;
    t.steps = 50;
    t.crop = 16;
    t.eval_interval = 25;
    t.train_scenes = 8;
    t.val_scenes = 2;
    t.scene.height = 32;
    t.scene.width = 32;
    return t;
}

}  // namespace

TEST(Adam, ZeroGradientLeavesParametersAndDecaysMoments) {
    ParamStore store;
    store.add("w", {3}).mutable_data()[0] = 1.5;
    OptimState state;
    state.moments["w"] = {{0.2, 0.0, 0.0}, {0.04, 0.0, 0.0}};
    state.step = 1;
    store.tensor("w").mutable_grad();  // allocates an all-zero gradient
    TrainConfig cfg;
    adam_step(store, state, cfg);
    EXPECT_EQ(state.step, 2u);
    EXPECT_NEAR(state.moments["w"].m[0], 0.9 * 0.2, 1e-15);
    EXPECT_NEAR(state.moments["w"].v[0], 0.999 * 0.04, 1e-15);
    // A zero gradient on a parameter with no momentum does not move it.
    EXPECT_EQ(store.at("w").tensor.data()[1], 0.0);
    EXPECT_FALSE(store.at("w").tensor.has_grad());
}

TEST(Adam, FirstStepIsLearningRateTimesSign) {
    for (double g : {3.0, -0.02}) {
        ParamStore store;
        Tensor& w = store.add("w", {1});
        w.mutable_data()[0] = 1.0;
        backward(sum(scale(w, g)));
        OptimState state;
        TrainConfig cfg;
        adam_step(store, state, cfg);
        EXPECT_NEAR(w.data()[0], 1.0 - cfg.lr * (g > 0 ? 1.0 : -1.0), 1e-9);
    }
}

TEST(Adam, QuadraticDecreasesMonotonically) {
    ParamStore store;
    Tensor& w = store.add("w", {1});
    OptimState state;
    TrainConfig cfg;
    cfg.lr = 0.1;
    double previous = INFINITY;
    for (int i = 0; i < 10; ++i) {
        Tensor d = add_scalar(w, -3.0);
        Tensor loss = sum(mul(d, d));
        EXPECT_LT(loss.item(), previous);
        previous = loss.item();
        backward(loss);
        adam_step(store, state, cfg);
    }
    EXPECT_LT(previous, 9.0);
}

TEST(Adam, MissingGradientIsAnError) {
    ParamStore store;
    Tensor& a = store.add("a", {1});
    store.add("b", {1});
    backward(sum(a));
    OptimState state;
    EXPECT_THROW(adam_step(store, state, TrainConfig{}), Error);
}

TEST(Crop, FullExtentIsIdentity) {
    SceneSpec spec;
    spec.height = spec.width = 32;
    spec.seed = 1;
    DepthSample s = synth_scene(spec);
    Rng rng(1);
    DepthSample c = random_crop(s, 32, rng);
    EXPECT_EQ(oracle::max_abs_diff(c.rgb.data(), s.rgb.data()), 0.0);
    EXPECT_EQ(oracle::max_abs_diff(c.depth_hr.data(), s.depth_hr.data()), 0.0);
    EXPECT_EQ(oracle::max_abs_diff(c.depth_lr.data(), s.depth_lr.data()), 0.0);
}

TEST(Crop, KeepsDegradationInvariantAndIsSeeded) {
    SceneSpec spec;
    spec.seed = 2;
    DepthSample s = synth_scene(spec);
    Rng a(7), b(7);
    for (int i = 0; i < 5; ++i) {
        DepthSample x = random_crop(s, 16, a), y = random_crop(s, 16, b);
        EXPECT_EQ(x.rgb.shape(), (Shape{1, 3, 16, 16}));
        EXPECT_EQ(x.depth_lr.shape(), (Shape{1, 1, 4, 4}));
        EXPECT_EQ(oracle::max_abs_diff(x.depth_lr.data(), degrade(x.depth_hr, 4).data()), 0.0);
        EXPECT_EQ(oracle::max_abs_diff(x.depth_hr.data(), y.depth_hr.data()), 0.0);
    }
}

TEST(Crop, OversizedOrMisalignedRejected) {
    SceneSpec spec;
    DepthSample s = synth_scene(spec);
    Rng rng(1);
    EXPECT_THROW(random_crop(s, 128, rng), ConfigError);
    EXPECT_THROW(random_crop(s, 18, rng), ConfigError);
}

TEST(Train, TinyRunLowersProbeLoss) {
    TrainResult r = train(tiny_train(), tiny_model());
    EXPECT_LT(r.final.l_total, r.initial.l_total);
    EXPECT_TRUE(std::isfinite(r.final_val_rmse_cm));
}

TEST(Train, ZeroStepsCheckpointsInitialization) {
    TrainConfig t = tiny_train();
    t.steps = 0;
    t.checkpoint = scratch("zero_steps.sgnr").string();
    train(t, tiny_model());
    Sgnet fresh(tiny_model());
    std::ifstream in(t.checkpoint, std::ios::binary);
    std::vector<unsigned char> saved{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    EXPECT_EQ(saved, encode_checkpoint(fresh.params(), fresh.config()));
}

TEST(Train, LogHasHeaderAndOneLinePerEvaluation) {
    TrainConfig t = tiny_train();
    t.steps = 10;
    t.eval_interval = 4;
    t.log = scratch("tiny.tsv").string();
    train(t, tiny_model());
    std::ifstream in(t.log);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, kTrainLogHeader);
    std::vector<std::string> steps;
    while (std::getline(in, line)) steps.push_back(line.substr(0, line.find('\t')));
    EXPECT_EQ(steps, (std::vector<std::string>{"0", "4", "8", "10"}));
}

TEST(Train, InvalidConfigRejected) {
    TrainConfig t = tiny_train();
    t.crop = 15;
    EXPECT_THROW(train(t, tiny_model()), ConfigError);
    t = tiny_train();
    t.batch = 0;
    EXPECT_THROW(train(t, tiny_model()), ConfigError);
}

TEST(Evaluate, ZeroHeadEqualsBaselineExactly) {
    Sgnet model(tiny_model());
    model.zero_fam_head();
    PoolSpec p;
    p.count = 3;
    p.scene.height = p.scene.width = 16;
    p.scene.scale = 2;
    EvalReport r = evaluate(model, make_pool(p));
    ASSERT_EQ(r.rows.size(), 3u);
    for (const auto& row : r.rows) EXPECT_EQ(row.rmse_cm, row.baseline_cm);
    EXPECT_EQ(r.mean_rmse_cm, r.mean_baseline_cm);
}

TEST(Evaluate, RepeatableAndMatchesExternalRmse) {
    Sgnet model(tiny_model());
    PoolSpec p;
    p.count = 2;
    p.scene.height = p.scene.width = 16;
    p.scene.scale = 2;
    auto pool = make_pool(p);
    std::ostringstream a, b;
    write_eval_table(a, evaluate(model, pool));
    write_eval_table(b, evaluate(model, pool));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "index\tseed\trmse_cm\tbicubic_cm");
    EvalReport r = evaluate(model, pool);
    for (size_t i = 0; i < pool.size(); ++i) {
        NoGradGuard g;
        Tensor sr = model.forward(pool[i].rgb, pool[i].depth_lr).d_sr;
        double acc = 0.0;
        for (size_t k = 0; k < sr.data().size(); ++k) {
            const double d = sr.data()[k] - pool[i].depth_hr.data()[k];
            acc += d * d;
        }
        EXPECT_NEAR(r.rows[i].rmse_cm, 100.0 * std::sqrt(acc / static_cast<double>(sr.data().size())), 1e-10);
    }
}

TEST(Evaluate, ScaleMismatchRejected) {
    Sgnet model(tiny_model());
    PoolSpec p;
    p.count = 1;
    p.scene.height = p.scene.width = 16;
    p.scene.scale = 4;
    EXPECT_THROW(evaluate(model, make_pool(p)), ConfigError);
}

TEST(Config, ParsesKeysCommentsAndWhitespace) {
    std::istringstream in("# run\nchannels = 12\n  lr=0.002  # trailing\n\nscene_noise = 0.5\ncheckpoint = out.sgnr\n");
    RunConfig rc = run_config_from(parse_key_values(in));
    EXPECT_EQ(rc.model.channels, 12u);
    EXPECT_EQ(rc.train.lr, 0.002);
    EXPECT_EQ(rc.train.scene.noise, 0.5);
    EXPECT_EQ(rc.train.checkpoint, "out.sgnr");
    EXPECT_EQ(rc.model.sdb_count, ModelConfig{}.sdb_count);
}

TEST(Config, RejectsUnknownRepeatedAndMalformed) {
    std::istringstream unknown("chanels = 3\n");
    EXPECT_THROW(run_config_from(parse_key_values(unknown)), ConfigError);
    std::istringstream repeated("lr = 1\nlr = 2\n");
    EXPECT_THROW(parse_key_values(repeated), ConfigError);
    std::istringstream no_equals("lr 1\n");
    EXPECT_THROW(parse_key_values(no_equals), ConfigError);
    std::istringstream bad_number("steps = ten\n");
    EXPECT_THROW(run_config_from(parse_key_values(bad_number)), ConfigError);
    std::istringstream negative("channels = -4\n");
    EXPECT_THROW(run_config_from(parse_key_values(negative)), ConfigError);
    EXPECT_THROW(read_key_values(scratch("no_such.cfg").string()), Error);
}

TEST(Config, PoolAndGradcheckSpecs) {
    std::istringstream pool("count = 5\nseed = 3\nscale = 8\nheight = 32\nwidth = 48\nz_max = 9\n");
    PoolSpec p = pool_spec_from(parse_key_values(pool));
    EXPECT_EQ(p.count, 5u);
    EXPECT_EQ(p.seed, 3u);
    EXPECT_EQ(p.scene.scale, 8u);
    EXPECT_EQ(p.scene.width, 48);
    EXPECT_EQ(p.scene.z_max, 9.0);
    std::istringstream gc("channels = 4\nlr_height = 6\nrel_tol = 1e-4\n");
    GradcheckConfig g = gradcheck_config_from(parse_key_values(gc));
    EXPECT_EQ(g.model.channels, 4u);
    EXPECT_EQ(g.lr_height, 6);
    EXPECT_EQ(g.rel_tol, 1e-4);
    std::istringstream stray("count = 1\nlr = 3\n");
    EXPECT_THROW(pool_spec_from(parse_key_values(stray)), ConfigError);
}
