#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "sgnet/checkpoint.hpp"
#include "sgnet/config.hpp"
#include "sgnet/error.hpp"
#include "sgnet/gradcheck.hpp"
#include "sgnet/image_io.hpp"
#include "sgnet/train.hpp"

namespace {

using namespace sgnet;

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

int run_train(const std::string& config_path, bool quiet) {
    RunConfig rc = load_run_config(config_path);
    TrainResult r = train(rc.train, rc.model, quiet ? nullptr : &std::cout);
    std::cout << "params\t" << r.model.params().total_scalars() << '\n'
              << "best_step\t" << r.best_step << '\n'
              << "best_val_rmse_cm\t" << r.best_val_rmse_cm << '\n'
              << "final_val_rmse_cm\t" << r.final_val_rmse_cm << '\n'
              << "bicubic_rmse_cm\t" << r.baseline_rmse_cm << '\n';
    return 0;
}

int run_infer(const std::string& ckpt, const std::string& rgb_path, const std::string& lr_path,
              const std::string& out_path, int bits) {
    Sgnet model = load_model(ckpt);
    Tensor rgb = read_rgb_ppm(rgb_path);
    DepthImage lr = read_depth_pgm(lr_path);
    SgnetOutput out;
    {
        NoGradGuard no_grad;
        out = model.forward(rgb, lr.depth);
    }
    write_depth_pgm(out_path, out.d_sr, lr.z_min, lr.z_max, bits);
    const Shape& s = out.d_sr.shape();
    std::cout << "wrote " << out_path << " (" << s.w << "x" << s.h << ")\n";
    return 0;
}

int run_eval(const std::string& ckpt, const std::string& scenes) {
    Sgnet model = load_model(ckpt);
    PoolSpec pool = load_pool_spec(scenes);
    if (pool.scene.scale != model.config().scale)
        throw ConfigError("scene pool scale " + std::to_string(pool.scene.scale) +
                          " does not match checkpoint scale " + std::to_string(model.config().scale));
    write_eval_table(std::cout, evaluate(model, make_pool(pool)));
    return 0;
}

int run_degrade(const std::string& in_path, uint32_t scale, const std::string& out_path) {
    DepthImage in = read_depth_pgm(in_path);
    Tensor lr = degrade(in.depth, scale);
    write_depth_pgm(out_path, lr, in.z_min, in.z_max, in.bits);
    return 0;
}

// Channel-mean amplitude, centered (fftshift) and log1p-scaled, as an 8-bit PGM.
void write_spectrum(const std::filesystem::path& path, const Tensor& amplitude) {
    const Shape& s = amplitude.shape();
    const int64_t plane = s.plane();
    auto a = amplitude.data();
    std::vector<double> out(static_cast<size_t>(plane), 0.0);
    for (int64_t c = 0; c < s.c; ++c)
        for (int64_t y = 0; y < s.h; ++y)
            for (int64_t x = 0; x < s.w; ++x) {
                const int64_t ys = (y + s.h / 2) % s.h, xs = (x + s.w / 2) % s.w;
                out[static_cast<size_t>(ys * s.w + xs)] += a[static_cast<size_t>(c * plane + y * s.w + x)];
            }
    double peak = 0.0;
    for (double& v : out) {
        v = std::log1p(v / static_cast<double>(s.c));
        peak = std::max(peak, v);
    }
    write_depth_pgm(path.string(), Tensor::from_data({1, 1, s.h, s.w}, std::move(out)), 0.0,
                    peak > 0.0 ? peak : 1.0, 8);
}

int run_spectra_dump(const std::string& ckpt, const std::string& rgb_path, const std::string& lr_path,
                     const std::string& out_dir) {
    Sgnet model = load_model(ckpt);
    Tensor rgb = read_rgb_ppm(rgb_path);
    DepthImage lr = read_depth_pgm(lr_path);
    std::vector<SdbTrace> traces;
    {
        NoGradGuard no_grad;
        model.forward(rgb, lr.depth, &traces);
    }
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    for (size_t i = 0; i < traces.size(); ++i) {
        const std::string stem = "sdb" + std::to_string(i + 1);
        write_spectrum(dir / (stem + "_a_dg.pgm"), traces[i].amplitude_dg);
        write_spectrum(dir / (stem + "_a_rgb.pgm"), traces[i].amplitude_rgb);
        write_spectrum(dir / (stem + "_a_diff.pgm"), traces[i].amplitude_diff);
    }
    std::cout << "wrote " << 3 * traces.size() << " spectra to " << out_dir << '\n';
    return 0;
}

int run_gradcheck_cmd(const std::string& config_path) {
    GradcheckConfig cfg = config_path.empty() ? GradcheckConfig{} : load_gradcheck_config(config_path);
    GradcheckReport r = run_gradcheck(cfg, [](int64_t done, int64_t total) {
        std::cerr << "\rchecked " << done << "/" << total << std::flush;
    });
    std::cerr << '\n';
    for (const auto& f : r.failures)
        std::cout << "FAIL\t" << f.name << '[' << f.index << "]\tanalytic " << f.analytic << "\tnumeric "
                  << f.numeric << "\trel " << f.rel_error << '\n';
    std::cout << "checked\t" << r.checked << "\nfailed\t" << r.failed << "\nmax_rel_error\t" << r.max_rel_error
              << "\nmax_abs_error\t" << r.max_abs_error << "\nrestepped\t" << r.restepped << '\n';
    return r.passed() ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    sgnet::retain_freed_memory();
    CLI::App app{"Guided depth super-resolution: training, inference and diagnostics"};
    app.require_subcommand(1);

    std::string config, ckpt, rgb, lr, out, in, scenes, out_dir;
    uint32_t scale = 1;
    int bits = 16;
    bool quiet = false;

    auto* train_cmd = app.add_subcommand("train", "Train on a synthetic scene pool");
    train_cmd->add_option("--config", config, "key = value run configuration")->required()->check(CLI::ExistingFile);
    train_cmd->add_flag("--quiet", quiet, "Only print the final summary");

    auto* infer_cmd = app.add_subcommand("infer", "Super-resolve one LR depth map");
    infer_cmd->add_option("--ckpt", ckpt)->required()->check(CLI::ExistingFile);
    infer_cmd->add_option("--rgb", rgb, "P6 guidance image")->required()->check(CLI::ExistingFile);
    infer_cmd->add_option("--lr", lr, "P5 depth map with #depth_range")->required()->check(CLI::ExistingFile);
    infer_cmd->add_option("--out", out)->required();
    infer_cmd->add_option("--bits", bits, "Output sample depth")->check(CLI::IsMember({8, 16}));

    auto* eval_cmd = app.add_subcommand("eval", "RMSE (cm) of a checkpoint on a synthetic pool");
    eval_cmd->add_option("--ckpt", ckpt)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--scenes", scenes, "key = value pool spec")->required()->check(CLI::ExistingFile);

    auto* degrade_cmd = app.add_subcommand("degrade", "Bicubic down-sampling of a depth map");
    degrade_cmd->add_option("--in", in)->required()->check(CLI::ExistingFile);
    degrade_cmd->add_option("--scale", scale)->required()->check(CLI::IsMember({1, 2, 4, 8, 16}));
    degrade_cmd->add_option("--out", out)->required();

    auto* spectra_cmd = app.add_subcommand("spectra-dump", "Write per-block amplitude spectra as PGMs");
    spectra_cmd->add_option("--ckpt", ckpt)->required()->check(CLI::ExistingFile);
    spectra_cmd->add_option("--rgb", rgb)->required()->check(CLI::ExistingFile);
    spectra_cmd->add_option("--lr", lr)->required()->check(CLI::ExistingFile);
    spectra_cmd->add_option("--out-dir", out_dir)->required();

    auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every parameter gradient");
    grad_cmd->add_option("--config", config, "key = value model and check settings")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*train_cmd) return run_train(config, quiet);
        if (*infer_cmd) return run_infer(ckpt, rgb, lr, out, bits);
        if (*eval_cmd) return run_eval(ckpt, scenes);
        if (*degrade_cmd) return run_degrade(in, scale, out);
        if (*spectra_cmd) return run_spectra_dump(ckpt, rgb, lr, out_dir);
        if (*grad_cmd) return run_gradcheck_cmd(config);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
