#pragma once

#include <istream>
#include <map>
#include <string>

#include "sgnet/gradcheck.hpp"
#include "sgnet/model.hpp"
#include "sgnet/scene.hpp"
#include "sgnet/train.hpp"

namespace sgnet {

/// Flat "key = value" text. '#' starts a comment; blank lines are ignored.
/// Repeated keys and lines without '=' are errors.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in);
KeyValues read_key_values(const std::string& path);

struct RunConfig {
    ModelConfig model;
    TrainConfig train;
};

// Model and training keys; unknown keys throw ConfigError.
RunConfig run_config_from(const KeyValues& kv);
RunConfig load_run_config(const std::string& path);

// Scene-pool keys (count, seed, height, width, scale, primitives, depth range, noise).
PoolSpec pool_spec_from(const KeyValues& kv);
PoolSpec load_pool_spec(const std::string& path);

// Model keys plus lr_height, lr_width, sample_seed, fd_step, rel_tol, abs_floor, jitter, jitter_seed.
GradcheckConfig gradcheck_config_from(const KeyValues& kv);
GradcheckConfig load_gradcheck_config(const std::string& path);

}  // namespace sgnet
