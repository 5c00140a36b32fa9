#include "sgnet/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <limits>

#include "sgnet/error.hpp"

namespace sgnet {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ConfigError("config: invalid value '" + text + "' for key '" + key + "'");
    return v;
}

uint32_t parse_u32(const std::string& key, const std::string& text) {
    const auto v = parse_number<uint64_t>(key, text);
    if (v > std::numeric_limits<uint32_t>::max()) throw ConfigError("config: value of '" + key + "' is too large");
    return static_cast<uint32_t>(v);
}

int64_t parse_extent(const std::string& key, const std::string& text) {
    const auto v = parse_number<int64_t>(key, text);
    if (v < 1) throw ConfigError("config: '" + key + "' must be positive");
    return v;
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

void apply_keys(const KeyValues& kv, const std::map<std::string, Setter>& setters) {
    for (const auto& [key, value] : kv) {
        auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("config: unknown key '" + key + "'");
        it->second(key, value);
    }
}

void add_scene_keys(std::map<std::string, Setter>& m, SceneSpec& s, const std::string& prefix) {
    m[prefix + "height"] = [&s](auto& k, auto& v) { s.height = parse_extent(k, v); };
    m[prefix + "width"] = [&s](auto& k, auto& v) { s.width = parse_extent(k, v); };
    m[prefix + "rectangles"] = [&s](auto& k, auto& v) { s.rectangles = parse_u32(k, v); };
    m[prefix + "circles"] = [&s](auto& k, auto& v) { s.circles = parse_u32(k, v); };
    m[prefix + "ramps"] = [&s](auto& k, auto& v) { s.ramps = parse_u32(k, v); };
    m[prefix + "texture_patches"] = [&s](auto& k, auto& v) { s.texture_patches = parse_u32(k, v); };
    m[prefix + "z_min"] = [&s](auto& k, auto& v) { s.z_min = parse_number<double>(k, v); };
    m[prefix + "z_max"] = [&s](auto& k, auto& v) { s.z_max = parse_number<double>(k, v); };
    m[prefix + "noise"] = [&s](auto& k, auto& v) { s.noise = parse_number<double>(k, v); };
}

void add_model_keys(std::map<std::string, Setter>& s, ModelConfig& m) {
    s["channels"] = [&m](auto& k, auto& v) { m.channels = parse_u32(k, v); };
    s["sdb_count"] = [&m](auto& k, auto& v) { m.sdb_count = parse_u32(k, v); };
    s["scale"] = [&m](auto& k, auto& v) { m.scale = parse_u32(k, v); };
    s["res_blocks"] = [&m](auto& k, auto& v) { m.res_blocks = parse_u32(k, v); };
    s["attention_ratio"] = [&m](auto& k, auto& v) { m.attention_ratio = parse_u32(k, v); };
    s["model_seed"] = [&m](auto& k, auto& v) { m.seed = parse_number<uint64_t>(k, v); };
    s["lambda1"] = [&m](auto& k, auto& v) { m.lambda1 = parse_number<double>(k, v); };
    s["lambda2"] = [&m](auto& k, auto& v) { m.lambda2 = parse_number<double>(k, v); };
    s["gamma1"] = [&m](auto& k, auto& v) { m.gamma1 = parse_number<double>(k, v); };
    s["gamma2"] = [&m](auto& k, auto& v) { m.gamma2 = parse_number<double>(k, v); };
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line_no) + " is not 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: line " + std::to_string(line_no) + " has an empty key");
        if (!kv.emplace(key, value).second)
            throw ConfigError("config: key '" + key + "' is repeated on line " + std::to_string(line_no));
    }
    return kv;
}

KeyValues read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    return parse_key_values(in);
}

RunConfig run_config_from(const KeyValues& kv) {
    RunConfig rc;
    ModelConfig& m = rc.model;
    TrainConfig& t = rc.train;
    std::map<std::string, Setter> s;
    add_model_keys(s, m);
    s["lr"] = [&t](auto& k, auto& v) { t.lr = parse_number<double>(k, v); };
    s["beta1"] = [&t](auto& k, auto& v) { t.beta1 = parse_number<double>(k, v); };
    s["beta2"] = [&t](auto& k, auto& v) { t.beta2 = parse_number<double>(k, v); };
    s["epsilon"] = [&t](auto& k, auto& v) { t.epsilon = parse_number<double>(k, v); };
    s["steps"] = [&t](auto& k, auto& v) { t.steps = parse_u32(k, v); };
    s["batch"] = [&t](auto& k, auto& v) { t.batch = parse_u32(k, v); };
    s["crop"] = [&t](auto& k, auto& v) { t.crop = parse_u32(k, v); };
    s["eval_interval"] = [&t](auto& k, auto& v) { t.eval_interval = parse_u32(k, v); };
    s["train_scenes"] = [&t](auto& k, auto& v) { t.train_scenes = parse_u32(k, v); };
    s["val_scenes"] = [&t](auto& k, auto& v) { t.val_scenes = parse_u32(k, v); };
    s["seed"] = [&t](auto& k, auto& v) { t.seed = parse_number<uint64_t>(k, v); };
    s["checkpoint"] = [&t](auto&, auto& v) { t.checkpoint = v; };
    s["log"] = [&t](auto&, auto& v) { t.log = v; };
    add_scene_keys(s, t.scene, "scene_");
    apply_keys(kv, s);
    t.scene.scale = m.scale;
    m.validate();
    t.validate(m.scale);
    return rc;
}

RunConfig load_run_config(const std::string& path) { return run_config_from(read_key_values(path)); }

PoolSpec pool_spec_from(const KeyValues& kv) {
    PoolSpec p;
    std::map<std::string, Setter> s;
    s["count"] = [&p](auto& k, auto& v) { p.count = parse_u32(k, v); };
    s["seed"] = [&p](auto& k, auto& v) { p.seed = parse_number<uint64_t>(k, v); };
    s["scale"] = [&p](auto& k, auto& v) { p.scene.scale = parse_u32(k, v); };
    add_scene_keys(s, p.scene, "");
    apply_keys(kv, s);
    if (p.count < 1) throw ConfigError("config: count must be >= 1");
    p.scene.validate();
    return p;
}

PoolSpec load_pool_spec(const std::string& path) { return pool_spec_from(read_key_values(path)); }

GradcheckConfig gradcheck_config_from(const KeyValues& kv) {
    GradcheckConfig g;
    std::map<std::string, Setter> s;
    add_model_keys(s, g.model);
    s["lr_height"] = [&g](auto& k, auto& v) { g.lr_height = parse_extent(k, v); };
    s["lr_width"] = [&g](auto& k, auto& v) { g.lr_width = parse_extent(k, v); };
    s["sample_seed"] = [&g](auto& k, auto& v) { g.sample_seed = parse_number<uint64_t>(k, v); };
    s["fd_step"] = [&g](auto& k, auto& v) { g.step = parse_number<double>(k, v); };
    s["rel_tol"] = [&g](auto& k, auto& v) { g.rel_tol = parse_number<double>(k, v); };
    s["abs_floor"] = [&g](auto& k, auto& v) { g.abs_floor = parse_number<double>(k, v); };
    s["jitter"] = [&g](auto& k, auto& v) { g.jitter = parse_number<double>(k, v); };
    s["jitter_seed"] = [&g](auto& k, auto& v) { g.jitter_seed = parse_number<uint64_t>(k, v); };
    apply_keys(kv, s);
    g.model.validate();
    if (!(g.step > 0.0) || !(g.rel_tol > 0.0) || !(g.abs_floor >= 0.0) || !(g.jitter >= 0.0))
        throw ConfigError("config: fd_step and rel_tol must be positive, abs_floor and jitter non-negative");
    return g;
}

GradcheckConfig load_gradcheck_config(const std::string& path) {
    return gradcheck_config_from(read_key_values(path));
}

}  // namespace sgnet
