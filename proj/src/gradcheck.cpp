#include "sgnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "sgnet/error.hpp"
#include "sgnet/ops.hpp"

namespace sgnet {

bool gradient_matches(double analytic, double numeric, double rel_tol, double abs_floor) {
    const double diff = std::abs(analytic - numeric);
    if (diff <= abs_floor) return true;
    return diff / std::max(std::abs(analytic), std::abs(numeric)) < rel_tol;
}

GradcheckReport gradcheck_model(Sgnet& model, const DepthSample& sample, const GradcheckConfig& cfg,
                                 const std::function<void(int64_t, int64_t)>& progress) {
    if (!(cfg.step > 0.0)) throw ConfigError("gradcheck: step must be positive");
    const ModelConfig& mcfg = model.config();
    ParamStore& store = model.params();
    store.clear_grad();
    {
        SgnetOutput out = model.forward(sample.rgb, sample.depth_lr);
        backward(loss_total(out.d_sr, out.g_sr, sample.depth_hr, mcfg).total);
    }

    // Loss and branch signature at the current parameter values.
    auto loss_at = [&] {
        NoGradGuard no_grad;
        BranchProbe probe;
        SgnetOutput out = model.forward(sample.rgb, sample.depth_lr);
        const double l = loss_total(out.d_sr, out.g_sr, sample.depth_hr, mcfg).l_total;
        return std::pair{l, probe.signature()};
    };
    const uint64_t base = loss_at().second;

    GradcheckReport report;
    const int64_t total = store.total_scalars();
    for (const auto& [name, p] : store.entries()) {
        Tensor w = p.tensor;
        if (!w.has_grad()) throw Error("gradcheck: parameter '" + name + "' received no gradient");
        const std::vector<double> analytic(w.grad().begin(), w.grad().end());
        auto x = w.mutable_data();
        for (size_t i = 0; i < x.size(); ++i) {
            const double saved = x[i];
            // Central difference at step h; `smooth` is false when either side changed branch.
            auto central = [&](double h, bool& smooth) {
                x[i] = saved + h;
                const auto [up, su] = loss_at();
                x[i] = saved - h;
                const auto [down, sd] = loss_at();
                x[i] = saved;
                smooth = su == base && sd == base;
                return (up - down) / (2.0 * h);
            };
            bool smooth = true;
            double numeric = central(cfg.step, smooth);
            if (!smooth && !gradient_matches(analytic[i], numeric, cfg.rel_tol, cfg.abs_floor)) {
                for (double h : {cfg.step / 10.0, cfg.step / 100.0}) {
                    const double retry = central(h, smooth);
                    if (smooth) {
                        numeric = retry;
                        ++report.restepped;
                        break;
                    }
                }
            }
            const double diff = std::abs(analytic[i] - numeric);
            const double rel = diff / std::max({std::abs(analytic[i]), std::abs(numeric), cfg.abs_floor});
            ++report.checked;
            report.max_abs_error = std::max(report.max_abs_error, diff);
            if (diff > cfg.abs_floor) report.max_rel_error = std::max(report.max_rel_error, rel);
            if (!gradient_matches(analytic[i], numeric, cfg.rel_tol, cfg.abs_floor)) {
                ++report.failed;
                if (report.failures.size() < kMaxRecordedFailures)
                    report.failures.push_back({name, static_cast<int64_t>(i), analytic[i], numeric, rel});
            }
        }
        if (progress) progress(report.checked, total);
    }
    store.clear_grad();
    return report;
}

GradcheckReport run_gradcheck(const GradcheckConfig& cfg, const std::function<void(int64_t, int64_t)>& progress) {
    SceneSpec spec;
    spec.height = cfg.lr_height * cfg.model.scale;
    spec.width = cfg.lr_width * cfg.model.scale;
    spec.scale = cfg.model.scale;
    spec.seed = cfg.sample_seed;
    const DepthSample sample = synth_scene(spec);
    Sgnet model(cfg.model);
    Rng rng(cfg.jitter_seed);
    for (const auto& [name, p] : model.params().entries()) {
        Tensor w = p.tensor;
        for (double& v : w.mutable_data()) v += rng.uniform(-cfg.jitter, cfg.jitter);
    }
    return gradcheck_model(model, sample, cfg, progress);
}

}  // namespace sgnet
