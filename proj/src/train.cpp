#include "sgnet/train.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "sgnet/checkpoint.hpp"
#include "sgnet/error.hpp"
#include "sgnet/ops.hpp"

namespace sgnet {

void TrainConfig::validate(uint32_t scale) const {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be positive and finite");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
    if (batch < 1 || crop < 1 || eval_interval < 1 || train_scenes < 1 || val_scenes < 1)
        throw ConfigError("batch, crop, eval_interval and scene counts must be >= 1");
    if (scale < 1 || crop % scale != 0)
        throw ConfigError("crop " + std::to_string(crop) + " is not divisible by scale " + std::to_string(scale));
    if (crop > scene.height || crop > scene.width)
        throw ConfigError("crop " + std::to_string(crop) + " exceeds the scene extents");
    SceneSpec s = scene;
    s.scale = scale;
    s.validate();
}

void adam_step(ParamStore& store, OptimState& state, const TrainConfig& cfg) {
    for (const auto& [name, p] : store.entries()) {
        if (!p.tensor.has_grad()) throw Error("adam: parameter '" + name + "' has no gradient");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (const auto& [name, p] : store.entries()) {
        Tensor w = p.tensor;
        auto g = w.grad();
        auto& mom = state.moments[name];
        if (mom.m.empty()) {
            mom.m.assign(g.size(), 0.0);
            mom.v.assign(g.size(), 0.0);
        }
        auto x = w.mutable_data();
        for (size_t i = 0; i < g.size(); ++i) {
            mom.m[i] = cfg.beta1 * mom.m[i] + (1.0 - cfg.beta1) * g[i];
            mom.v[i] = cfg.beta2 * mom.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double m_hat = mom.m[i] / c1;
            const double v_hat = mom.v[i] / c2;
            x[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
    store.clear_grad();
}

namespace {

Tensor crop_planes(const Tensor& t, int64_t y0, int64_t x0, int64_t size) {
    const Shape& s = t.shape();
    std::vector<double> out(static_cast<size_t>(s.n * s.c * size * size));
    auto src = t.data();
    size_t k = 0;
    for (int64_t p = 0; p < s.n * s.c; ++p)
        for (int64_t y = 0; y < size; ++y)
            for (int64_t x = 0; x < size; ++x) out[k++] = src[static_cast<size_t>((p * s.h + y0 + y) * s.w + x0 + x)];
    return Tensor::from_data({s.n, s.c, size, size}, std::move(out));
}

Tensor stack_along_batch(const std::vector<const Tensor*>& parts) {
    Shape s = parts.front()->shape();
    std::vector<double> out;
    out.reserve(static_cast<size_t>(s.numel()) * parts.size());
    for (const Tensor* t : parts) {
        if (t->shape() != s) throw ShapeError("stack: mismatched sample shapes " + s.str() + " vs " + t->shape().str());
        out.insert(out.end(), t->data().begin(), t->data().end());
    }
    s.n *= static_cast<int64_t>(parts.size());
    return Tensor::from_data(s, std::move(out));
}

std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

DepthSample random_crop(const DepthSample& sample, uint32_t crop, Rng& rng) {
    const Shape& s = sample.depth_hr.shape();
    const int64_t c = crop;
    const int64_t scale = sample.scale;
    if (c < 1 || c > s.h || c > s.w)
        throw ConfigError("crop " + std::to_string(crop) + " does not fit " + s.str());
    if (c % scale != 0) throw ConfigError("crop " + std::to_string(crop) + " is not aligned to scale " + std::to_string(scale));
    const int64_t y0 = scale * static_cast<int64_t>(rng.below(static_cast<uint64_t>((s.h - c) / scale + 1)));
    const int64_t x0 = scale * static_cast<int64_t>(rng.below(static_cast<uint64_t>((s.w - c) / scale + 1)));
    DepthSample out;
    out.rgb = crop_planes(sample.rgb, y0, x0, c);
    out.depth_hr = crop_planes(sample.depth_hr, y0, x0, c);
    out.depth_lr = degrade(out.depth_hr, sample.scale);
    out.scale = sample.scale;
    out.seed = sample.seed;
    return out;
}

DepthSample stack_samples(const std::vector<DepthSample>& samples) {
    if (samples.empty()) throw ConfigError("stack: no samples");
    std::vector<const Tensor*> rgb, hr, lr;
    for (const auto& s : samples) {
        if (s.scale != samples.front().scale) throw ConfigError("stack: mixed scales");
        rgb.push_back(&s.rgb);
        hr.push_back(&s.depth_hr);
        lr.push_back(&s.depth_lr);
    }
    DepthSample out;
    out.rgb = stack_along_batch(rgb);
    out.depth_hr = stack_along_batch(hr);
    out.depth_lr = stack_along_batch(lr);
    out.scale = samples.front().scale;
    out.seed = samples.front().seed;
    return out;
}

PoolSpec train_pool_spec(const TrainConfig& cfg, uint32_t scale) {
    PoolSpec p;
    p.count = cfg.train_scenes;
    p.scene = cfg.scene;
    p.scene.scale = scale;
    p.seed = mix_seed(cfg.seed, 1);
    return p;
}

PoolSpec val_pool_spec(const TrainConfig& cfg, uint32_t scale) {
    PoolSpec p = train_pool_spec(cfg, scale);
    p.count = cfg.val_scenes;
    p.seed = mix_seed(cfg.seed, 2);
    return p;
}

EvalReport evaluate(const Sgnet& model, const std::vector<DepthSample>& pool) {
    const uint32_t s = model.config().scale;
    NoGradGuard no_grad;
    EvalReport report;
    for (const auto& sample : pool) {
        if (sample.scale != s)
            throw ConfigError("evaluate: sample scale " + std::to_string(sample.scale) +
                              " does not match model scale " + std::to_string(s));
        SgnetOutput out = model.forward(sample.rgb, sample.depth_lr);
        Tensor bicubic = bicubic_resize(sample.depth_lr, ScaleFactor::up(static_cast<int>(s)));
        EvalRow row;
        row.seed = sample.seed;
        row.rmse_cm = rmse(out.d_sr, sample.depth_hr, kCentimetersPerMeter);
        row.baseline_cm = rmse(bicubic, sample.depth_hr, kCentimetersPerMeter);
        report.mean_rmse_cm += row.rmse_cm;
        report.mean_baseline_cm += row.baseline_cm;
        report.rows.push_back(row);
    }
    if (!report.rows.empty()) {
        report.mean_rmse_cm /= static_cast<double>(report.rows.size());
        report.mean_baseline_cm /= static_cast<double>(report.rows.size());
    }
    return report;
}

void write_eval_table(std::ostream& out, const EvalReport& report) {
    out << "index\tseed\trmse_cm\tbicubic_cm\n";
    for (size_t i = 0; i < report.rows.size(); ++i) {
        const auto& r = report.rows[i];
        out << i << '\t' << r.seed << '\t' << fmt(r.rmse_cm) << '\t' << fmt(r.baseline_cm) << '\n';
    }
    out << "mean\t-\t" << fmt(report.mean_rmse_cm) << '\t' << fmt(report.mean_baseline_cm) << '\n';
}

void retain_freed_memory() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, std::numeric_limits<int>::max());
#endif
}

TrainResult train(const TrainConfig& cfg, const ModelConfig& mcfg, std::ostream* progress) {
    mcfg.validate();
    cfg.validate(mcfg.scale);
    const std::vector<DepthSample> train_pool = make_pool(train_pool_spec(cfg, mcfg.scale));
    const std::vector<DepthSample> val_pool = make_pool(val_pool_spec(cfg, mcfg.scale));

    Sgnet model(mcfg);
    OptimState state;
    Rng rng(mix_seed(cfg.seed, 4));

    // Fixed crops used to track the training objective across evaluations.
    std::vector<DepthSample> probe_parts;
    Rng probe_rng(mix_seed(cfg.seed, 3));
    for (uint32_t i = 0; i < cfg.batch; ++i)
        probe_parts.push_back(random_crop(train_pool[i % train_pool.size()], cfg.crop, probe_rng));
    const DepthSample probe = stack_samples(probe_parts);
    auto probe_loss = [&] {
        NoGradGuard no_grad;
        SgnetOutput out = model.forward(probe.rgb, probe.depth_lr);
        return loss_total(out.d_sr, out.g_sr, probe.depth_hr, mcfg);
    };

    std::ofstream log;
    if (!cfg.log.empty()) {
        log.open(cfg.log);
        if (!log) throw Error("cannot open log '" + cfg.log + "' for writing");
        log << kTrainLogHeader << '\n';
    }
    if (progress) *progress << kTrainLogHeader << '\n';

    TrainResult result{Sgnet(mcfg), {}, {}, std::numeric_limits<double>::infinity(), 0, 0.0, 0.0};
    std::map<std::string, std::vector<double>> best;
    auto checkpoint = [&](uint32_t step) {
        EvalReport report = evaluate(model, val_pool);
        LossBreakdown lb = probe_loss();
        if (step == 0) result.initial = lb;
        result.final = lb;
        result.final_val_rmse_cm = report.mean_rmse_cm;
        result.baseline_rmse_cm = report.mean_baseline_cm;
        const std::string line = std::to_string(step) + '\t' + fmt(lb.l_spa) + '\t' + fmt(lb.l_gra) + '\t' +
                                 fmt(lb.l_amp) + '\t' + fmt(lb.l_pha) + '\t' + fmt(lb.l_total) + '\t' +
                                 fmt(report.mean_rmse_cm);
        if (log.is_open()) log << line << '\n' << std::flush;
        if (progress) *progress << line << '\n' << std::flush;
        if (report.mean_rmse_cm < result.best_val_rmse_cm) {
            result.best_val_rmse_cm = report.mean_rmse_cm;
            result.best_step = step;
            for (const auto& [name, p] : model.params().entries())
                best[name].assign(p.tensor.data().begin(), p.tensor.data().end());
            if (!cfg.checkpoint.empty()) save_checkpoint(model.params(), mcfg, cfg.checkpoint);
        }
    };

    checkpoint(0);
    for (uint32_t step = 1; step <= cfg.steps; ++step) {
        std::vector<DepthSample> parts;
        parts.reserve(cfg.batch);
        for (uint32_t b = 0; b < cfg.batch; ++b)
            parts.push_back(random_crop(train_pool[rng.below(train_pool.size())], cfg.crop, rng));
        const DepthSample batch = stack_samples(parts);
        try {
            SgnetOutput out = model.forward(batch.rgb, batch.depth_lr);
            LossBreakdown lb = loss_total(out.d_sr, out.g_sr, batch.depth_hr, mcfg);
            backward(lb.total);
        } catch (const NumericError& e) {
            throw NumericError("training diverged at step " + std::to_string(step) + ": " + e.what());
        }
        adam_step(model.params(), state, cfg);
        if (step % cfg.eval_interval == 0 || step == cfg.steps) checkpoint(step);
    }

    for (auto& [name, values] : best) {
        auto dst = model.params().tensor(name).mutable_data();
        std::copy(values.begin(), values.end(), dst.begin());
    }
    result.model = std::move(model);
    return result;
}

}  // namespace sgnet
