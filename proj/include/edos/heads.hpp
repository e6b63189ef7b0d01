#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "edos/encoder.hpp"
#include "edos/labels.hpp"

namespace edos {

enum class HeadVariant { LastLayerMLP, AvgLayersMLP, DualConcatMLP, DualMLPConcatMLP };

inline const char* head_variant_name(HeadVariant v) {
    switch (v) {
        case HeadVariant::LastLayerMLP: return "last_layer_mlp";
        case HeadVariant::AvgLayersMLP: return "avg_layers_mlp";
        case HeadVariant::DualConcatMLP: return "dual_concat_mlp";
        case HeadVariant::DualMLPConcatMLP: return "dual_mlp_concat_mlp";
    }
    throw std::logic_error("head_variant_name: bad variant");
}

inline HeadVariant head_variant_from_name(const std::string& name) {
    if (name == "last_layer_mlp") return HeadVariant::LastLayerMLP;
    if (name == "avg_layers_mlp") return HeadVariant::AvgLayersMLP;
    if (name == "dual_concat_mlp") return HeadVariant::DualConcatMLP;
    if (name == "dual_mlp_concat_mlp") return HeadVariant::DualMLPConcatMLP;
    throw std::invalid_argument("unknown head variant: " + name);
}

inline bool is_dual(HeadVariant v) {
    return v == HeadVariant::DualConcatMLP || v == HeadVariant::DualMLPConcatMLP;
}

struct HeadConfig {
    HeadVariant variant = HeadVariant::LastLayerMLP;
    std::vector<std::size_t> branch_hidden = {256}; // per-branch MLP widths (dual MLP variant)
    std::vector<std::size_t> trunk_hidden = {256};
    std::size_t num_classes = 2;
    double dropout = 0.1;
    bool mean_pool = false; // mask-aware mean over positions instead of [CLS]

    void validate() const {
        if (num_classes != 2 && num_classes != 4 && num_classes != 5 && num_classes != 11)
            throw std::invalid_argument("HeadConfig: num_classes must be one of 2, 4, 5, 11");
        if (variant == HeadVariant::DualMLPConcatMLP && branch_hidden.empty())
            throw std::invalid_argument("HeadConfig: dual MLP variant needs branch widths");
        if (dropout < 0.0 || dropout >= 1.0)
            throw std::invalid_argument("HeadConfig: dropout must be in [0,1)");
        for (std::size_t w : branch_hidden)
            if (w == 0) throw std::invalid_argument("HeadConfig: zero branch width");
        for (std::size_t w : trunk_hidden)
            if (w == 0) throw std::invalid_argument("HeadConfig: zero trunk width");
    }
};

template <typename T>
struct MlpParams {
    std::vector<std::pair<Var<T>, Var<T>>> layers; // hidden (w, b), relu + dropout each
};

template <typename T>
struct HeadParams {
    HeadConfig config;
    MlpParams<T> branch_a, branch_b; // DualMLPConcatMLP only; weights never shared
    MlpParams<T> trunk;
    Var<T> out_w, out_b; // final linear to num_classes
};

namespace detail {

template <typename T>
MlpParams<T> init_mlp(ParamStore<T>& store, const std::string& prefix, std::size_t in_width,
                      const std::vector<std::size_t>& hidden, Rng& rng) {
    MlpParams<T> mlp;
    std::size_t width = in_width;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        const std::string name = prefix + "l" + std::to_string(i);
        Var<T>& w = store.add(name + ".w",
                              normal_init<T>({width, hidden[i]}, rng.split(name + ".w")));
        Var<T>& b = store.add(name + ".b", Tensor<T>({hidden[i]}));
        mlp.layers.emplace_back(w, b);
        width = hidden[i];
    }
    return mlp;
}

template <typename T>
std::size_t mlp_out_width(const MlpParams<T>& mlp, std::size_t in_width) {
    return mlp.layers.empty() ? in_width : mlp.layers.back().first.shape()[1];
}

template <typename T>
Var<T> mlp_forward(const MlpParams<T>& mlp, Var<T> x, double rate, ForwardOptions<T>& fwd,
                   const std::string& stream) {
    for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
        x = relu(add(matmul(x, mlp.layers[i].first), mlp.layers[i].second));
        if (fwd.training && rate > 0.0) {
            Rng r = fwd.rng.split(stream).split(i);
            x = dropout(x, rate, r, true);
        }
    }
    return x;
}

} // namespace detail

// [CLS] vector of the final layer.
template <typename T>
Var<T> pool_last(const std::vector<Var<T>>& states) {
    if (states.empty()) throw std::invalid_argument("pool_last: empty hidden states");
    return select_position(states.back(), 0);
}

// Mean of the [CLS] vectors of the transformer layers H1..Hn; the embedding
// output H0 is not a layer.
template <typename T>
Var<T> pool_avg(const std::vector<Var<T>>& states) {
    if (states.size() < 2)
        throw std::invalid_argument("pool_avg: encoder has no transformer layers to average");
    Var<T> acc = select_position(states[1], 0);
    for (std::size_t i = 2; i < states.size(); ++i)
        acc = add(acc, select_position(states[i], 0));
    return scale(acc, T(1) / static_cast<T>(states.size() - 1));
}

// Mask-aware mean over positions of the final layer (alternative pooling).
template <typename T>
Var<T> pool_mean_tokens(const std::vector<Var<T>>& states, const TokenBatch& batch) {
    if (states.empty()) throw std::invalid_argument("pool_mean_tokens: empty hidden states");
    const Var<T>& h = states.back();
    const Shape& s = h.shape(); // (B, L, D)
    Tensor<T> weights(s);
    for (std::size_t b = 0; b < s[0]; ++b) {
        const std::int32_t* mask = batch.row_mask(b);
        T count = T(0);
        for (std::size_t l = 0; l < s[1]; ++l) count += static_cast<T>(mask[l]);
        for (std::size_t l = 0; l < s[1]; ++l)
            for (std::size_t d = 0; d < s[2]; ++d)
                weights[(b * s[1] + l) * s[2] + d] = mask[l] ? T(1) / count : T(0);
    }
    return scale(mean_axis(mul(h, constant(std::move(weights))), 1), static_cast<T>(s[1]));
}

// encoder_a first, encoder_b second.
template <typename T>
Var<T> fuse_concat(const Var<T>& ha, const Var<T>& hb) {
    return concat_last<T>({ha, hb});
}

// concat(MLP_a(ha), MLP_b(hb)) with unshared branch weights.
template <typename T>
Var<T> fuse_mlp_then_concat(const Var<T>& ha, const Var<T>& hb, const HeadParams<T>& head,
                            ForwardOptions<T>& fwd) {
    if (head.branch_a.layers.empty() || head.branch_b.layers.empty())
        throw std::invalid_argument("fuse_mlp_then_concat: branch MLPs not configured");
    Var<T> a = detail::mlp_forward(head.branch_a, ha, head.config.dropout, fwd, "branch_a");
    Var<T> b = detail::mlp_forward(head.branch_b, hb, head.config.dropout, fwd, "branch_b");
    return fuse_concat(a, b);
}

// Trunk MLP then the final linear layer; returns raw logits.
template <typename T>
Var<T> classify(const HeadParams<T>& head, Var<T> pooled, ForwardOptions<T>& fwd) {
    pooled = detail::mlp_forward(head.trunk, pooled, head.config.dropout, fwd, "trunk");
    return add(matmul(pooled, head.out_w), head.out_b);
}

template <typename T>
HeadParams<T> init_head_params(const HeadConfig& config, std::size_t in_a,
                               std::optional<std::size_t> in_b, ParamStore<T>& store,
                               const std::string& prefix, Rng rng) {
    config.validate();
    if (is_dual(config.variant) != in_b.has_value())
        throw std::invalid_argument("init_head_params: dual variants take exactly two inputs");
    HeadParams<T> head;
    head.config = config;
    std::size_t trunk_in = in_a;
    if (config.variant == HeadVariant::DualMLPConcatMLP) {
        head.branch_a = detail::init_mlp(store, prefix + "branch_a.", in_a, config.branch_hidden, rng);
        head.branch_b = detail::init_mlp(store, prefix + "branch_b.", *in_b, config.branch_hidden, rng);
        trunk_in = detail::mlp_out_width(head.branch_a, in_a) +
                   detail::mlp_out_width(head.branch_b, *in_b);
    } else if (config.variant == HeadVariant::DualConcatMLP) {
        trunk_in = in_a + *in_b;
    }
    head.trunk = detail::init_mlp(store, prefix + "trunk.", trunk_in, config.trunk_hidden, rng);
    const std::size_t last = detail::mlp_out_width(head.trunk, trunk_in);
    head.out_w = store.add(prefix + "out.w",
                           detail::normal_init<T>({last, config.num_classes},
                                                  rng.split(prefix + "out.w")));
    head.out_b = store.add(prefix + "out.b", Tensor<T>({config.num_classes}));
    return head;
}

// One or two encoders plus the classification head; the store owns every
// trainable tensor in checkpoint order.
template <typename T>
struct ModelBundle {
    TaskSelect task = TaskSelect::A;
    EncoderParams<T> encoder_a;
    std::optional<EncoderParams<T>> encoder_b;
    HeadParams<T> head;
    std::shared_ptr<ParamStore<T>> store;

    const HeadConfig& head_config() const { return head.config; }
};

template <typename T>
ModelBundle<T> make_bundle(TaskSelect task, const HeadConfig& head_config,
                           const EncoderConfig& config_a,
                           const std::optional<EncoderConfig>& config_b, std::uint64_t seed) {
    head_config.validate();
    if (is_dual(head_config.variant) != config_b.has_value())
        throw std::invalid_argument(is_dual(head_config.variant)
                                        ? "make_bundle: dual variant requires a second encoder"
                                        : "make_bundle: single variant forbids a second encoder");
    if (head_config.num_classes != num_classes_for(task))
        throw std::invalid_argument("make_bundle: head num_classes does not match task");
    ModelBundle<T> bundle;
    bundle.task = task;
    bundle.store = std::make_shared<ParamStore<T>>();
    Rng rng(seed);
    bundle.encoder_a = init_encoder_params(config_a, *bundle.store, "enc_a.", rng.split("enc_a"));
    if (config_b)
        bundle.encoder_b =
            init_encoder_params(*config_b, *bundle.store, "enc_b.", rng.split("enc_b"));
    bundle.head = init_head_params(head_config, config_a.d_model,
                                   config_b ? std::optional<std::size_t>(config_b->d_model)
                                            : std::nullopt,
                                   *bundle.store, "head.", rng.split("head"));
    return bundle;
}

// Pooled representation of one encoder per the head variant.
template <typename T>
Var<T> pooled_representation(const ModelBundle<T>& bundle, const std::vector<Var<T>>& states,
                             const TokenBatch& batch) {
    if (bundle.head.config.mean_pool) return pool_mean_tokens(states, batch);
    if (bundle.head.config.variant == HeadVariant::AvgLayersMLP) return pool_avg(states);
    return pool_last(states);
}

template <typename T>
Var<T> forward_logits(const ModelBundle<T>& bundle, const TokenBatch& batch,
                      ForwardOptions<T> fwd = {}) {
    ForwardOptions<T> fwd_a{fwd.training, fwd.rng.split("enc_a")};
    std::vector<Var<T>> states_a = encode_all_layers(bundle.encoder_a, batch, fwd_a);
    Var<T> pooled = pooled_representation(bundle, states_a, batch);
    if (bundle.encoder_b) {
        ForwardOptions<T> fwd_b{fwd.training, fwd.rng.split("enc_b")};
        std::vector<Var<T>> states_b = encode_all_layers(*bundle.encoder_b, batch, fwd_b);
        Var<T> pooled_b = pooled_representation(bundle, states_b, batch);
        ForwardOptions<T> fwd_h{fwd.training, fwd.rng.split("head")};
        if (bundle.head.config.variant == HeadVariant::DualMLPConcatMLP)
            pooled = fuse_mlp_then_concat(pooled, pooled_b, bundle.head, fwd_h);
        else
            pooled = fuse_concat(pooled, pooled_b);
        return classify(bundle.head, pooled, fwd_h);
    }
    ForwardOptions<T> fwd_h{fwd.training, fwd.rng.split("head")};
    return classify(bundle.head, pooled, fwd_h);
}

} // namespace edos
