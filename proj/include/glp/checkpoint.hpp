#pragma once

#include <string>

#include <json.hpp>

#include "glp/nn.hpp"

namespace glp {

// Single-file checkpoint: magic "GLPCKPT1", little-endian u64 manifest
// length, manifest JSON (version, hyperparameters, tensor names + shapes),
// then all tensor values as little-endian 64-bit floats concatenated in
// manifest order.  save then load is bit identity.

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const ParamStore& params, const nlohmann::json& hyper,
                     const std::string& path);

struct Checkpoint {
  ParamStore params;
  nlohmann::json hyper;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace glp
