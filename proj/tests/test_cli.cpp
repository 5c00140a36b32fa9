#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "sgnet/checkpoint.hpp"
#include "sgnet/image_io.hpp"
#include "sgnet/scene.hpp"

using namespace sgnet;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "sgnet_cli_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(SGNET_CLI_PATH) + " " + args + " > " + scratch("stdout.txt").string() +
                            " 2> " + scratch("stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

ModelConfig tiny() {
    ModelConfig c;
    c.channels = 4;
    c.sdb_count = 1;
    c.scale = 2;
    c.res_blocks = 1;
    c.attention_ratio = 2;
    return c;
}

}  // namespace

TEST(Cli, DegradeByOneIsPixelIdentical) {
    SceneSpec spec;
    spec.height = spec.width = 16;
    spec.seed = 4;
    DepthSample s = synth_scene(spec);
    auto in = scratch("hr.pgm"), out = scratch("same.pgm");
    write_depth_pgm(in.string(), s.depth_hr, spec.z_min, spec.z_max);
    ASSERT_EQ(cli("degrade --in " + in.string() + " --scale 1 --out " + out.string()), 0);
    DepthImage a = read_depth_pgm(in.string()), b = read_depth_pgm(out.string());
    EXPECT_EQ(oracle::max_abs_diff(a.depth.data(), b.depth.data()), 0.0);
}

TEST(Cli, DegradeShrinksByScale) {
    auto in = scratch("ramp.pgm"), out = scratch("ramp4.pgm");
    Rng rng(1);
    write_depth_pgm(in.string(), oracle::random_tensor({1, 1, 16, 24}, rng, 1, 2), 0.0, 4.0);
    ASSERT_EQ(cli("degrade --in " + in.string() + " --scale 4 --out " + out.string()), 0);
    EXPECT_EQ(read_depth_pgm(out.string()).depth.shape(), (Shape{1, 1, 4, 6}));
}

TEST(Cli, InferOutputIsScaleTimesInput) {
    Sgnet model(tiny());
    auto ckpt = scratch("tiny.sgnr"), rgb = scratch("rgb.ppm"), lr = scratch("lr.pgm"), out = scratch("sr.pgm");
    save_checkpoint(model.params(), model.config(), ckpt.string());
    Rng rng(2);
    write_rgb_ppm(rgb.string(), oracle::random_tensor({1, 3, 12, 16}, rng, 0, 1));
    write_depth_pgm(lr.string(), oracle::random_tensor({1, 1, 6, 8}, rng, 1, 3), 0.5, 4.0);
    ASSERT_EQ(cli("infer --ckpt " + ckpt.string() + " --rgb " + rgb.string() + " --lr " + lr.string() + " --out " +
                  out.string()),
              0)
        << read_text(scratch("stderr.txt"));
    DepthImage sr = read_depth_pgm(out.string());
    EXPECT_EQ(sr.depth.shape(), (Shape{1, 1, 12, 16}));
    EXPECT_EQ(sr.z_min, 0.5);
    EXPECT_EQ(sr.z_max, 4.0);
}

TEST(Cli, SpectraDumpWritesThreeMapsPerBlock) {
    ModelConfig c = tiny();
    c.sdb_count = 2;
    Sgnet model(c);
    auto ckpt = scratch("two.sgnr"), rgb = scratch("rgb2.ppm"), lr = scratch("lr2.pgm");
    auto dir = scratch("spectra");
    std::filesystem::remove_all(dir);
    save_checkpoint(model.params(), model.config(), ckpt.string());
    Rng rng(3);
    write_rgb_ppm(rgb.string(), oracle::random_tensor({1, 3, 8, 8}, rng, 0, 1));
    write_depth_pgm(lr.string(), oracle::random_tensor({1, 1, 4, 4}, rng, 1, 3), 0.0, 5.0);
    ASSERT_EQ(cli("spectra-dump --ckpt " + ckpt.string() + " --rgb " + rgb.string() + " --lr " + lr.string() +
                  " --out-dir " + dir.string()),
              0);
    for (const char* name : {"sdb1_a_dg.pgm", "sdb1_a_rgb.pgm", "sdb1_a_diff.pgm", "sdb2_a_dg.pgm"}) {
        DepthImage img = read_depth_pgm((dir / name).string());
        EXPECT_EQ(img.bits, 8) << name;
        EXPECT_EQ(img.depth.shape(), (Shape{1, 1, 8, 8})) << name;
    }
}

TEST(Cli, EvalPrintsTableAndChecksScale) {
    Sgnet model(tiny());
    auto ckpt = scratch("eval.sgnr"), pool = scratch("pool.cfg"), wrong = scratch("pool4.cfg");
    save_checkpoint(model.params(), model.config(), ckpt.string());
    write_text(pool, "count = 2\nseed = 5\nscale = 2\nheight = 16\nwidth = 16\n");
    write_text(wrong, "count = 2\nscale = 4\nheight = 16\nwidth = 16\n");
    ASSERT_EQ(cli("eval --ckpt " + ckpt.string() + " --scenes " + pool.string()), 0);
    const std::string table = read_text(scratch("stdout.txt"));
    EXPECT_EQ(table.rfind("index\tseed\trmse_cm\tbicubic_cm\n", 0), 0u) << table;
    EXPECT_NE(table.find("\nmean\t"), std::string::npos) << table;
    EXPECT_EQ(cli("eval --ckpt " + ckpt.string() + " --scenes " + wrong.string()), 1);
}

TEST(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(cli(""), 1);
    EXPECT_EQ(cli("frobnicate"), 1);
    EXPECT_EQ(cli("degrade --in /nonexistent.pgm --scale 2 --out x.pgm"), 1);
    auto in = scratch("hr.pgm");
    EXPECT_EQ(cli("degrade --in " + in.string() + " --scale 3 --out x.pgm"), 1);
    auto cfg = scratch("bad.cfg");
    write_text(cfg, "channels = 4\nbogus = 1\n");
    EXPECT_EQ(cli("train --config " + cfg.string()), 1);
    EXPECT_EQ(cli("--help"), 0);
}

TEST(Cli, RuntimeFailureExitsTwo) {
    auto bad = scratch("garbage.sgnr"), rgb = scratch("rgb.ppm"), lr = scratch("lr.pgm");
    write_text(bad, "not a checkpoint");
    EXPECT_EQ(cli("infer --ckpt " + bad.string() + " --rgb " + rgb.string() + " --lr " + lr.string() +
                  " --out " + scratch("never.pgm").string()),
              2);
}

TEST(Cli, GradcheckExitCodes) {
    auto ok = scratch("gc_small.cfg"), strict = scratch("gc_strict.cfg");
    write_text(ok, "channels = 2\nsdb_count = 1\nscale = 2\nres_blocks = 1\nattention_ratio = 2\nlr_height = 3\nlr_width = 3\n");
    write_text(strict, read_text(ok) + "rel_tol = 1e-300\nabs_floor = 0\n");
    EXPECT_EQ(cli("gradcheck --config " + ok.string()), 0) << read_text(scratch("stdout.txt"));
    EXPECT_NE(read_text(scratch("stdout.txt")).find("failed\t0\n"), std::string::npos);
    EXPECT_EQ(cli("gradcheck --config " + strict.string()), 2);
}

TEST(Cli, TrainWritesCheckpointAndLog) {
    auto cfg = scratch("train.cfg"), ckpt = scratch("run.sgnr"), log = scratch("run.tsv");
    write_text(cfg, "channels = 4\nsdb_count = 1\nscale = 2\nres_blocks = 1\nattention_ratio = 2\nsteps = 3\n"
                    "crop = 8\neval_interval = 2\ntrain_scenes = 2\nval_scenes = 1\nscene_height = 16\n"
                    "scene_width = 16\ncheckpoint = " + ckpt.string() + "\nlog = " + log.string() + "\n");
    ASSERT_EQ(cli("train --quiet --config " + cfg.string()), 0) << read_text(scratch("stderr.txt"));
    EXPECT_TRUE(std::filesystem::exists(ckpt));
    EXPECT_EQ(load_checkpoint(ckpt.string()).config.channels, 4u);
    EXPECT_EQ(read_text(log).rfind("step\tl_spa", 0), 0u);
}
