#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "edos/autograd.hpp"
#include "edos/ops.hpp"
#include "edos/rng.hpp"
#include "edos/vocab.hpp"

namespace edos {

enum class AttentionKind { absolute, disentangled };

inline const char* attention_kind_name(AttentionKind k) {
    return k == AttentionKind::absolute ? "absolute" : "disentangled";
}
inline AttentionKind attention_kind_from_name(const std::string& name) {
    if (name == "absolute") return AttentionKind::absolute;
    if (name == "disentangled") return AttentionKind::disentangled;
    throw std::invalid_argument("unknown attention kind: " + name);
}

struct EncoderConfig {
    std::size_t n_layers = 4;
    std::size_t n_heads = 4;
    std::size_t d_model = 128;
    std::size_t d_ff = 512;
    std::size_t vocab_size = 0;
    std::size_t max_len = kDefaultMaxLen;
    AttentionKind attention_kind = AttentionKind::absolute;
    std::size_t relative_clip = 8; // disentangled only
    double dropout = 0.1;

    std::size_t d_head() const { return d_model / n_heads; }

    void validate() const {
        if (n_heads == 0 || d_model == 0 || d_ff == 0)
            throw std::invalid_argument("EncoderConfig: zero dimension");
        if (d_model % n_heads != 0)
            throw std::invalid_argument("EncoderConfig: d_model must be divisible by n_heads");
        if (vocab_size == 0) throw std::invalid_argument("EncoderConfig: vocab_size unset");
        if (max_len < 3) throw std::invalid_argument("EncoderConfig: max_len must be >= 3");
        if (attention_kind == AttentionKind::disentangled && relative_clip < 1)
            throw std::invalid_argument("EncoderConfig: relative_clip must be >= 1");
        if (dropout < 0.0 || dropout >= 1.0)
            throw std::invalid_argument("EncoderConfig: dropout must be in [0,1)");
    }

    static EncoderConfig toy(std::size_t vocab, AttentionKind kind = AttentionKind::absolute) {
        EncoderConfig c;
        c.vocab_size = vocab;
        c.attention_kind = kind;
        return c;
    }

    static EncoderConfig base(std::size_t vocab, AttentionKind kind = AttentionKind::absolute) {
        EncoderConfig c;
        c.n_layers = 12;
        c.n_heads = 12;
        c.d_model = 768;
        c.d_ff = 3072;
        c.vocab_size = vocab;
        c.attention_kind = kind;
        return c;
    }
};

template <typename T>
struct EncoderLayerParams {
    Var<T> wq, bq, wk, bk, wv, bv, wo, bo;
    Var<T> ln1_gamma, ln1_beta;
    Var<T> ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    Var<T> ln2_gamma, ln2_beta;
};

template <typename T>
struct EncoderParams {
    EncoderConfig config;
    Var<T> tok_emb;  // (V, d_model)
    Var<T> pos_emb;  // (max_len, d_model), absolute kind only
    Var<T> rel_emb;  // (2k+1, d_model), disentangled kind only, shared across layers
    Var<T> emb_ln_gamma, emb_ln_beta;
    std::vector<EncoderLayerParams<T>> layers;
};

namespace detail {

template <typename T>
Tensor<T> normal_init(Shape shape, Rng rng, double stddev = 0.02) {
    Tensor<T> t(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(rng.normal() * stddev);
    return t;
}

} // namespace detail

// Registers all tensors under `prefix` in insertion order. Each tensor is
// initialized from its own named substream, so values depend only on the
// run seed and the tensor name.
template <typename T>
EncoderParams<T> init_encoder_params(const EncoderConfig& config, ParamStore<T>& store,
                                     const std::string& prefix, Rng rng) {
    config.validate();
    EncoderParams<T> p;
    p.config = config;
    const std::size_t d = config.d_model;
    auto normal = [&](const std::string& name, Shape shape) -> Var<T>& {
        return store.add(prefix + name,
                         detail::normal_init<T>(std::move(shape), rng.split(prefix + name)));
    };
    auto zeros = [&](const std::string& name, Shape shape) -> Var<T>& {
        return store.add(prefix + name, Tensor<T>(std::move(shape)));
    };
    auto ones = [&](const std::string& name, Shape shape) -> Var<T>& {
        return store.add(prefix + name, Tensor<T>::full(std::move(shape), T(1)));
    };

    p.tok_emb = normal("tok_emb", {config.vocab_size, d});
    if (config.attention_kind == AttentionKind::absolute)
        p.pos_emb = normal("pos_emb", {config.max_len, d});
    else
        p.rel_emb = normal("rel_emb", {2 * config.relative_clip + 1, d});
    p.emb_ln_gamma = ones("emb_ln.gamma", {d});
    p.emb_ln_beta = zeros("emb_ln.beta", {d});

    for (std::size_t l = 0; l < config.n_layers; ++l) {
        const std::string lp = "layer" + std::to_string(l) + ".";
        EncoderLayerParams<T> layer;
        layer.wq = normal(lp + "attn.wq", {d, d});
        layer.bq = zeros(lp + "attn.bq", {d});
        layer.wk = normal(lp + "attn.wk", {d, d});
        layer.bk = zeros(lp + "attn.bk", {d});
        layer.wv = normal(lp + "attn.wv", {d, d});
        layer.bv = zeros(lp + "attn.bv", {d});
        layer.wo = normal(lp + "attn.wo", {d, d});
        layer.bo = zeros(lp + "attn.bo", {d});
        layer.ln1_gamma = ones(lp + "ln1.gamma", {d});
        layer.ln1_beta = zeros(lp + "ln1.beta", {d});
        layer.ffn_w1 = normal(lp + "ffn.w1", {d, config.d_ff});
        layer.ffn_b1 = zeros(lp + "ffn.b1", {config.d_ff});
        layer.ffn_w2 = normal(lp + "ffn.w2", {config.d_ff, d});
        layer.ffn_b2 = zeros(lp + "ffn.b2", {d});
        layer.ln2_gamma = ones(lp + "ln2.gamma", {d});
        layer.ln2_beta = zeros(lp + "ln2.beta", {d});
        p.layers.push_back(std::move(layer));
    }
    return p;
}

// Additive mask bias: 0 at real keys, -1e9 at padded keys, shape (B, L, L).
template <typename T>
Tensor<T> attention_mask_bias(const TokenBatch& batch) {
    const std::size_t b = batch.rows, l = batch.max_len;
    Tensor<T> bias({b, l, l});
    for (std::size_t r = 0; r < b; ++r) {
        const std::int32_t* mask = batch.row_mask(r);
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t j = 0; j < l; ++j)
                bias[(r * l + i) * l + j] = mask[j] ? T(0) : T(-1e9);
    }
    return bias;
}

// Per-head attention logits Q Kᵀ / sqrt(d_head); q,k: (B, L, d_head).
template <typename T>
Var<T> attention_scores_absolute(const Var<T>& q, const Var<T>& k) {
    const std::size_t d_head = q.shape().back();
    const T inv = T(1) / std::sqrt(static_cast<T>(d_head));
    return scale(matmul(q, k, false, true), inv);
}

namespace detail {

inline std::int64_t clip_distance(std::int64_t delta, std::int64_t clip) {
    if (delta < -clip) return -clip;
    if (delta > clip) return clip;
    return delta;
}

// out[b,i,j] = P[b,i, clip(i-j)+k]; P: (B, L, 2k+1) content->position scores.
template <typename T>
Var<T> rel_gather_c2p(const Var<T>& p, std::size_t clip) {
    const Shape& s = p.shape();
    if (s.size() != 3 || s[2] != 2 * clip + 1)
        throw std::invalid_argument("rel_gather_c2p: expected (B, L, 2k+1)");
    const std::size_t b = s[0], l = s[1], w = s[2];
    Tensor<T> out({b, l, l});
    const T* pv = p.value().data();
    for (std::size_t r = 0; r < b; ++r)
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t j = 0; j < l; ++j) {
                const std::size_t idx = static_cast<std::size_t>(
                    clip_distance(static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j),
                                  static_cast<std::int64_t>(clip)) +
                    static_cast<std::int64_t>(clip));
                out[(r * l + i) * l + j] = pv[(r * l + i) * w + idx];
            }
    return Var<T>::op("rel_gather_c2p", std::move(out), {p}, [b, l, w, clip](GraphNode<T>& node) {
        auto& parent = *node.parents[0];
        if (!parent.requires_grad) return;
        T* dp = parent.ensure_grad().data();
        const T* g = node.grad.data();
        for (std::size_t r = 0; r < b; ++r)
            for (std::size_t i = 0; i < l; ++i)
                for (std::size_t j = 0; j < l; ++j) {
                    const std::size_t idx = static_cast<std::size_t>(
                        clip_distance(static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j),
                                      static_cast<std::int64_t>(clip)) +
                        static_cast<std::int64_t>(clip));
                    dp[(r * l + i) * w + idx] += g[(r * l + i) * l + j];
                }
    });
}

// out[b,i,j] = P[b,j, clip(j-i)+k]; P: (B, L, 2k+1) position->content scores.
template <typename T>
Var<T> rel_gather_p2c(const Var<T>& p, std::size_t clip) {
    const Shape& s = p.shape();
    if (s.size() != 3 || s[2] != 2 * clip + 1)
        throw std::invalid_argument("rel_gather_p2c: expected (B, L, 2k+1)");
    const std::size_t b = s[0], l = s[1], w = s[2];
    Tensor<T> out({b, l, l});
    const T* pv = p.value().data();
    for (std::size_t r = 0; r < b; ++r)
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t j = 0; j < l; ++j) {
                const std::size_t idx = static_cast<std::size_t>(
                    clip_distance(static_cast<std::int64_t>(j) - static_cast<std::int64_t>(i),
                                  static_cast<std::int64_t>(clip)) +
                    static_cast<std::int64_t>(clip));
                out[(r * l + i) * l + j] = pv[(r * l + j) * w + idx];
            }
    return Var<T>::op("rel_gather_p2c", std::move(out), {p}, [b, l, w, clip](GraphNode<T>& node) {
        auto& parent = *node.parents[0];
        if (!parent.requires_grad) return;
        T* dp = parent.ensure_grad().data();
        const T* g = node.grad.data();
        for (std::size_t r = 0; r < b; ++r)
            for (std::size_t i = 0; i < l; ++i)
                for (std::size_t j = 0; j < l; ++j) {
                    const std::size_t idx = static_cast<std::size_t>(
                        clip_distance(static_cast<std::int64_t>(j) - static_cast<std::int64_t>(i),
                                      static_cast<std::int64_t>(clip)) +
                        static_cast<std::int64_t>(clip));
                    dp[(r * l + j) * w + idx] += g[(r * l + i) * l + j];
                }
    });
}

} // namespace detail

// Disentangled logits: (Qc Kcᵀ + Qc Kr(δ)ᵀ + Kc Qr(δ)ᵀ) / sqrt(3 d_head),
// with δ the relative distance clipped to [-k, k]. q,k: (B, L, d_head);
// qr,kr: (2k+1, d_head) projections of the shared relative embeddings.
template <typename T>
Var<T> attention_scores_disentangled(const Var<T>& q, const Var<T>& k, const Var<T>& qr,
                                     const Var<T>& kr, std::size_t clip) {
    const std::size_t d_head = q.shape().back();
    const T inv = T(1) / std::sqrt(T(3) * static_cast<T>(d_head));
    Var<T> c2c = matmul(q, k, false, true);
    Var<T> c2p = detail::rel_gather_c2p(matmul(q, kr, false, true), clip);
    Var<T> p2c = detail::rel_gather_p2c(matmul(k, qr, false, true), clip);
    return scale(add(add(c2c, c2p), p2c), inv);
}

template <typename T>
struct ForwardOptions {
    bool training = false;
    Rng rng{0}; // dropout stream; only consumed when training
};

namespace detail {

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
    return add(matmul(x, w), b);
}

// One attention sublayer before the residual: projections, per-head scores,
// masked softmax, context, output projection.
template <typename T>
Var<T> attention_block(const EncoderParams<T>& p, const EncoderLayerParams<T>& layer,
                       const Var<T>& h, const Var<T>& mask_bias, ForwardOptions<T>& fwd,
                       std::size_t layer_index) {
    const EncoderConfig& cfg = p.config;
    const std::size_t d_head = cfg.d_head();
    Var<T> q = linear(h, layer.wq, layer.bq);
    Var<T> k = linear(h, layer.wk, layer.bk);
    Var<T> v = linear(h, layer.wv, layer.bv);

    Var<T> qr, kr;
    if (cfg.attention_kind == AttentionKind::disentangled) {
        // Relative embeddings share the content projections, bias-free so a
        // zero table reduces exactly to content-only attention.
        qr = matmul(p.rel_emb, layer.wq);
        kr = matmul(p.rel_emb, layer.wk);
    }

    std::vector<Var<T>> heads;
    heads.reserve(cfg.n_heads);
    for (std::size_t head = 0; head < cfg.n_heads; ++head) {
        const std::size_t off = head * d_head;
        Var<T> qh = slice_last(q, off, d_head);
        Var<T> kh = slice_last(k, off, d_head);
        Var<T> vh = slice_last(v, off, d_head);
        Var<T> logits;
        if (cfg.attention_kind == AttentionKind::absolute) {
            logits = attention_scores_absolute(qh, kh);
        } else {
            Var<T> qrh = slice_last(qr, off, d_head);
            Var<T> krh = slice_last(kr, off, d_head);
            logits = attention_scores_disentangled(qh, kh, qrh, krh, cfg.relative_clip);
        }
        Var<T> weights = softmax_last(add(logits, mask_bias));
        heads.push_back(matmul(weights, vh));
    }
    Var<T> ctx = cfg.n_heads == 1 ? heads[0] : concat_last(heads);
    Var<T> out = linear(ctx, layer.wo, layer.bo);
    if (fwd.training && cfg.dropout > 0.0) {
        Rng r = fwd.rng.split("attn_dropout").split(layer_index);
        out = dropout(out, cfg.dropout, r, true);
    }
    return out;
}

template <typename T>
Var<T> ffn_block(const EncoderConfig& cfg, const EncoderLayerParams<T>& layer, const Var<T>& h,
                 ForwardOptions<T>& fwd, std::size_t layer_index) {
    Var<T> out = linear(gelu(linear(h, layer.ffn_w1, layer.ffn_b1)), layer.ffn_w2, layer.ffn_b2);
    if (fwd.training && cfg.dropout > 0.0) {
        Rng r = fwd.rng.split("ffn_dropout").split(layer_index);
        out = dropout(out, cfg.dropout, r, true);
    }
    return out;
}

} // namespace detail

// Embedding output H0: token embeddings (+ learned absolute positions for
// the absolute kind; the disentangled kind carries positions inside
// attention), then layer norm and dropout.
template <typename T>
Var<T> embed(const EncoderParams<T>& p, const TokenBatch& batch, ForwardOptions<T> fwd = {}) {
    const EncoderConfig& cfg = p.config;
    if (batch.max_len > cfg.max_len)
        throw std::invalid_argument("embed: batch max_len exceeds encoder max_len");
    Var<T> h = embedding_lookup(p.tok_emb, batch.ids, {batch.rows, batch.max_len});
    if (cfg.attention_kind == AttentionKind::absolute) {
        std::vector<std::int32_t> positions(batch.max_len);
        for (std::size_t i = 0; i < batch.max_len; ++i) positions[i] = static_cast<std::int32_t>(i);
        Var<T> pos = embedding_lookup(p.pos_emb, positions, {batch.max_len});
        h = add(h, pos);
    }
    h = layer_norm(h, p.emb_ln_gamma, p.emb_ln_beta);
    if (fwd.training && cfg.dropout > 0.0) {
        Rng r = fwd.rng.split("emb_dropout");
        h = dropout(h, cfg.dropout, r, true);
    }
    return h;
}

// All layer outputs [H0, H1, ..., Hn]; each layer is post-layer-norm:
// h = LN(h + attention(h)); h = LN(h + ffn(h)).
template <typename T>
std::vector<Var<T>> encode_all_layers(const EncoderParams<T>& p, const TokenBatch& batch,
                                      ForwardOptions<T> fwd = {}) {
    std::vector<Var<T>> states;
    states.reserve(p.config.n_layers + 1);
    Var<T> mask_bias = constant(attention_mask_bias<T>(batch));
    Var<T> h = embed(p, batch, fwd);
    states.push_back(h);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& layer = p.layers[l];
        Var<T> attn = detail::attention_block(p, layer, h, mask_bias, fwd, l);
        h = layer_norm(add(h, attn), layer.ln1_gamma, layer.ln1_beta);
        Var<T> ff = detail::ffn_block(p.config, layer, h, fwd, l);
        h = layer_norm(add(h, ff), layer.ln2_gamma, layer.ln2_beta);
        states.push_back(h);
    }
    return states;
}

} // namespace edos
