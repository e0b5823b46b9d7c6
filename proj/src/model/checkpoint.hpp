#pragma once

#include <string>
#include <utility>
#include <vector>

#include "core/nn.hpp"
#include "core/tensor.hpp"
#include "json.hpp"

namespace umic {

// Versioned binary checkpoint container shared by the toy-codec (UMTC1)
// and diffusion-model (UMDM1) files:
//   magic(5) version(1) manifest_len(u32) manifest_json
//   tensor_count(u32) { name_len(u16) name rank(u8) dims(u32...) f64-le data }
//   sha256(32, over everything before it)
// Loading verifies magic, version and hash and refuses tampered files.
struct CheckpointData {
    std::string magic;  // "UMTC1" or "UMDM1"
    nlohmann::json manifest;
    std::vector<std::pair<std::string, Tensor>> tensors;

    const Tensor* find(const std::string& name) const;
};

void save_checkpoint_file(const std::string& path, const CheckpointData& data);
CheckpointData load_checkpoint_file(const std::string& path,
                                    const std::string& expect_magic);

// ParamStore <-> checkpoint tensor list. `prefix` namespaces the entries.
void store_params(const ParamStore& ps, CheckpointData& data,
                  const std::string& prefix = "");
// strict: every prefixed param must be present in the checkpoint.
void load_params(ParamStore& ps, const CheckpointData& data,
                 const std::string& prefix = "", bool strict = true);
// Adam moment tensors, stored under "<prefix>adam.m/<name>" style keys.
void store_adam_state(const ParamStore& ps, CheckpointData& data,
                      const std::string& prefix = "");
void load_adam_state(ParamStore& ps, const CheckpointData& data,
                     const std::string& prefix = "");

inline constexpr const char* kToyCodecMagic = "UMTC1";
inline constexpr const char* kDiffusionMagic = "UMDM1";

}  // namespace umic
