#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edos/autograd.hpp"
#include "edos/vocab.hpp"

namespace edos {

// Binary container: magic "EDOSCKPT", u32 format version, u64 metadata byte
// length, UTF-8 JSON metadata (info block, vocabulary, tensor directory with
// name/dtype/shape/offset), then raw little-endian f32 tensor payload.
inline constexpr char kCheckpointMagic[8] = {'E', 'D', 'O', 'S', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct LoadedCheckpoint {
    nlohmann::json meta;
    Vocabulary vocab;
    std::vector<std::pair<std::string, Tensor<float>>> tensors; // file order
    const Tensor<float>* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const ParamStore<float>& store,
                     const nlohmann::json& info, const Vocabulary& vocab);

LoadedCheckpoint load_checkpoint(const std::string& path);

// Overwrites every store tensor from the checkpoint; names and shapes must
// match one-to-one.
void restore_store(ParamStore<float>& store, const LoadedCheckpoint& ckpt);

} // namespace edos
