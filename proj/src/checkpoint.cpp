#include "edos/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace edos {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian; big-endian hosts unsupported");

const Tensor<float>* LoadedCheckpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

void save_checkpoint(const std::string& path, const ParamStore<float>& store,
                     const nlohmann::json& info, const Vocabulary& vocab) {
    nlohmann::json meta;
    meta["format_version"] = kCheckpointVersion;
    meta["experiment"] = info;
    meta["vocab"] = vocab.tokens();
    nlohmann::json directory = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, var] : store) {
        nlohmann::json entry;
        entry["name"] = name;
        entry["dtype"] = "f32";
        entry["shape"] = var.shape();
        entry["offset"] = offset;
        directory.push_back(std::move(entry));
        offset += var.numel() * sizeof(float);
    }
    meta["tensors"] = std::move(directory);
    const std::string meta_text = meta.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    const std::uint32_t version = kCheckpointVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint64_t meta_len = meta_text.size();
    out.write(reinterpret_cast<const char*>(&meta_len), sizeof(meta_len));
    out.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));
    for (const auto& [name, var] : store)
        out.write(reinterpret_cast<const char*>(var.value().data()),
                  static_cast<std::streamsize>(var.numel() * sizeof(float)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[sizeof(kCheckpointMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw std::runtime_error(path + ": not a checkpoint file (bad magic)");
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != kCheckpointVersion)
        throw std::runtime_error(path + ": unsupported checkpoint version " +
                                 std::to_string(version));
    std::uint64_t meta_len = 0;
    in.read(reinterpret_cast<char*>(&meta_len), sizeof(meta_len));
    if (!in) throw std::runtime_error(path + ": truncated metadata length");
    std::string meta_text(meta_len, '\0');
    in.read(meta_text.data(), static_cast<std::streamsize>(meta_len));
    if (!in) throw std::runtime_error(path + ": truncated metadata");

    LoadedCheckpoint ckpt;
    ckpt.meta = nlohmann::json::parse(meta_text);
    ckpt.vocab = Vocabulary(ckpt.meta.at("vocab").get<std::vector<std::string>>());

    const std::streampos payload_start = in.tellg();
    for (const auto& entry : ckpt.meta.at("tensors")) {
        const std::string name = entry.at("name").get<std::string>();
        const std::string dtype = entry.at("dtype").get<std::string>();
        if (dtype != "f32") throw std::runtime_error(path + ": unsupported dtype " + dtype);
        const Shape shape = entry.at("shape").get<Shape>();
        const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
        Tensor<float> tensor(shape);
        in.seekg(payload_start + static_cast<std::streamoff>(offset));
        in.read(reinterpret_cast<char*>(tensor.data()),
                static_cast<std::streamsize>(tensor.numel() * sizeof(float)));
        if (!in) throw std::runtime_error(path + ": truncated tensor payload for " + name);
        ckpt.tensors.emplace_back(name, std::move(tensor));
    }
    return ckpt;
}

void restore_store(ParamStore<float>& store, const LoadedCheckpoint& ckpt) {
    if (store.size() != ckpt.tensors.size())
        throw std::runtime_error("restore_store: checkpoint has " +
                                 std::to_string(ckpt.tensors.size()) + " tensors, model expects " +
                                 std::to_string(store.size()));
    for (auto& [name, var] : store) {
        const Tensor<float>* t = ckpt.find(name);
        if (!t) throw std::runtime_error("restore_store: checkpoint is missing tensor " + name);
        if (!t->same_shape(var.value()))
            throw std::runtime_error("restore_store: shape mismatch for " + name);
        var.value() = *t;
    }
}

} // namespace edos
