#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edos/autograd.hpp"
#include "edos/rng.hpp"
#include "edos/tensor.hpp"

namespace edos {

namespace detail {

// C(m,n) += A(m,k) * B(k,n), contiguous row-major slabs. ikj order keeps the
// accumulation order of every output element fixed, so results are
// reproducible regardless of vectorization.
template <typename T>
inline void gemm_acc(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const T* arow = a + i * k;
        T* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = arow[p];
            const T* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

template <typename T>
inline std::vector<T> transpose2d(const T* src, std::size_t rows, std::size_t cols) {
    std::vector<T> out(rows * cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out[j * rows + i] = src[i * cols + j];
    return out;
}

// C(m,n) += op_ta(A_raw) * op_tb(B_raw) where op transposes the slab.
template <typename T>
inline void mm_acc(const T* a, std::size_t am, std::size_t ak, bool ta, const T* b, std::size_t bm,
                   std::size_t bk, bool tb, T* c) {
    const std::size_t m = ta ? ak : am;
    const std::size_t k = ta ? am : ak;
    const std::size_t k2 = tb ? bk : bm;
    const std::size_t n = tb ? bm : bk;
    if (k != k2) throw std::invalid_argument("matmul: inner dimension mismatch");
    std::vector<T> at, bt;
    if (ta) {
        at = transpose2d(a, am, ak);
        a = at.data();
    }
    if (tb) {
        bt = transpose2d(b, bm, bk);
        b = bt.data();
    }
    gemm_acc(a, b, c, m, k, n);
}

inline Shape leading_dims(const Shape& s) { return Shape(s.begin(), s.end() - 2); }

template <typename T>
inline bool suffix_broadcastable(const Shape& a, const Shape& b) {
    if (b.size() > a.size()) return false;
    for (std::size_t i = 0; i < b.size(); ++i)
        if (b[b.size() - 1 - i] != a[a.size() - 1 - i]) return false;
    return true;
}

} // namespace detail

template <typename T>
inline Var<T> constant(Tensor<T> value) {
    return Var<T>::leaf(std::move(value), /*requires_grad=*/false);
}

// a: (..., m, k), b: (..., k, n) or rank-2 (k, n) broadcast over a's leading
// dims. trans_a / trans_b transpose the trailing two axes of the operand.
template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b, bool trans_a = false, bool trans_b = false) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sa.size() < 2 || sb.size() < 2)
        throw std::invalid_argument("matmul: operands must have rank >= 2");
    const Shape lead_a = detail::leading_dims(sa);
    const Shape lead_b = detail::leading_dims(sb);
    const bool b_broadcast = sb.size() == 2 && !lead_a.empty();
    if (!b_broadcast && lead_a != lead_b)
        throw std::invalid_argument("matmul: leading dims mismatch " + shape_to_string(sa) + " vs " +
                                    shape_to_string(sb));
    const std::size_t am = sa[sa.size() - 2], ak = sa[sa.size() - 1];
    const std::size_t bm = sb[sb.size() - 2], bk = sb[sb.size() - 1];
    const std::size_t m = trans_a ? ak : am;
    const std::size_t k = trans_a ? am : ak;
    const std::size_t k2 = trans_b ? bk : bm;
    const std::size_t n = trans_b ? bm : bk;
    if (k != k2)
        throw std::invalid_argument("matmul: inner dimension mismatch " + shape_to_string(sa) +
                                    (trans_a ? "^T" : "") + " x " + shape_to_string(sb) +
                                    (trans_b ? "^T" : ""));

    const std::size_t batch = shape_numel(lead_a);
    Shape out_shape = lead_a;
    out_shape.push_back(m);
    out_shape.push_back(n);
    Tensor<T> out(out_shape);
    const T* pa = a.value().data();
    const T* pb = b.value().data();
    T* pc = out.data();
    for (std::size_t s = 0; s < batch; ++s) {
        const T* bslab = b_broadcast ? pb : pb + s * bm * bk;
        detail::mm_acc(pa + s * am * ak, am, ak, trans_a, bslab, bm, bk, trans_b, pc + s * m * n);
    }

    return Var<T>::op("matmul", std::move(out), {a, b}, [=](GraphNode<T>& node) {
        auto& pa_node = *node.parents[0];
        auto& pb_node = *node.parents[1];
        const T* g = node.grad.data();
        const T* av = pa_node.value.data();
        const T* bv = pb_node.value.data();
        if (pa_node.requires_grad) {
            T* da = pa_node.ensure_grad().data();
            for (std::size_t s = 0; s < batch; ++s) {
                const T* gs = g + s * m * n;
                const T* bs = b_broadcast ? bv : bv + s * bm * bk;
                if (!trans_a)
                    detail::mm_acc(gs, m, n, false, bs, bm, bk, !trans_b, da + s * am * ak);
                else
                    detail::mm_acc(bs, bm, bk, trans_b, gs, m, n, true, da + s * am * ak);
            }
        }
        if (pb_node.requires_grad) {
            T* db = pb_node.ensure_grad().data();
            for (std::size_t s = 0; s < batch; ++s) {
                const T* gs = g + s * m * n;
                const T* as = av + s * am * ak;
                T* dbs = b_broadcast ? db : db + s * bm * bk;
                if (!trans_b)
                    detail::mm_acc(as, am, ak, !trans_a, gs, m, n, false, dbs);
                else
                    detail::mm_acc(gs, m, n, true, as, am, ak, trans_a, dbs);
            }
        }
    });
}

// Elementwise a + b; b's shape must be a trailing suffix of a's (or equal).
template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    if (!detail::suffix_broadcastable<T>(a.shape(), b.shape()))
        throw std::invalid_argument("add: shape " + shape_to_string(b.shape()) +
                                    " does not broadcast over " + shape_to_string(a.shape()));
    const std::size_t bn = b.numel();
    Tensor<T> out(a.shape());
    const T* pa = a.value().data();
    const T* pb = b.value().data();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = pa[i] + pb[i % bn];
    return Var<T>::op("add", std::move(out), {a, b}, [bn](GraphNode<T>& node) {
        auto& pa_node = *node.parents[0];
        auto& pb_node = *node.parents[1];
        const T* g = node.grad.data();
        const std::size_t n = node.grad.numel();
        if (pa_node.requires_grad) {
            T* da = pa_node.ensure_grad().data();
            for (std::size_t i = 0; i < n; ++i) da[i] += g[i];
        }
        if (pb_node.requires_grad) {
            T* db = pb_node.ensure_grad().data();
            for (std::size_t i = 0; i < n; ++i) db[i % bn] += g[i];
        }
    });
}

// Elementwise a * b with the same suffix-broadcast rule as add.
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
    if (!detail::suffix_broadcastable<T>(a.shape(), b.shape()))
        throw std::invalid_argument("mul: shape " + shape_to_string(b.shape()) +
                                    " does not broadcast over " + shape_to_string(a.shape()));
    const std::size_t bn = b.numel();
    Tensor<T> out(a.shape());
    const T* pa = a.value().data();
    const T* pb = b.value().data();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = pa[i] * pb[i % bn];
    return Var<T>::op("mul", std::move(out), {a, b}, [bn](GraphNode<T>& node) {
        auto& pa_node = *node.parents[0];
        auto& pb_node = *node.parents[1];
        const T* g = node.grad.data();
        const T* av = pa_node.value.data();
        const T* bv = pb_node.value.data();
        const std::size_t n = node.grad.numel();
        if (pa_node.requires_grad) {
            T* da = pa_node.ensure_grad().data();
            for (std::size_t i = 0; i < n; ++i) da[i] += g[i] * bv[i % bn];
        }
        if (pb_node.requires_grad) {
            T* db = pb_node.ensure_grad().data();
            for (std::size_t i = 0; i < n; ++i) db[i % bn] += g[i] * av[i];
        }
    });
}

template <typename T>
Var<T> scale(const Var<T>& a, T c) {
    Tensor<T> out(a.shape());
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] * c;
    return Var<T>::op("scale", std::move(out), {a}, [c](GraphNode<T>& node) {
        auto& p = *node.parents[0];
        if (!p.requires_grad) return;
        T* da = p.ensure_grad().data();
        const T* g = node.grad.data();
        for (std::size_t i = 0; i < node.grad.numel(); ++i) da[i] += g[i] * c;
    });
}

template <typename T>
Var<T> concat_last(const std::vector<Var<T>>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_last: no operands");
    Shape base = parts[0].shape();
    std::size_t total_last = 0;
    std::vector<std::size_t> widths;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        if (s.size() != base.size()) throw std::invalid_argument("concat_last: rank mismatch");
        for (std::size_t i = 0; i + 1 < s.size(); ++i)
            if (s[i] != base[i]) throw std::invalid_argument("concat_last: leading dims mismatch");
        widths.push_back(s.back());
        total_last += s.back();
    }
    Shape out_shape = base;
    out_shape.back() = total_last;
    Tensor<T> out(out_shape);
    const std::size_t rows = out.numel() / total_last;
    std::size_t off = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const T* src = parts[p].value().data();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < widths[p]; ++j)
                out[r * total_last + off + j] = src[r * widths[p] + j];
        off += widths[p];
    }
    return Var<T>::op("concat_last", std::move(out), parts,
                      [widths, total_last, rows](GraphNode<T>& node) {
                          const T* g = node.grad.data();
                          std::size_t off = 0;
                          for (std::size_t p = 0; p < node.parents.size(); ++p) {
                              auto& parent = *node.parents[p];
                              if (parent.requires_grad) {
                                  T* dp = parent.ensure_grad().data();
                                  for (std::size_t r = 0; r < rows; ++r)
                                      for (std::size_t j = 0; j < widths[p]; ++j)
                                          dp[r * widths[p] + j] += g[r * total_last + off + j];
                              }
                              off += widths[p];
                          }
                      });
}

template <typename T>
Var<T> slice_last(const Var<T>& a, std::size_t start, std::size_t len) {
    const Shape& s = a.shape();
    const std::size_t last = s.back();
    if (start + len > last || len == 0)
        throw std::invalid_argument("slice_last: range [" + std::to_string(start) + "," +
                                    std::to_string(start + len) + ") out of " + std::to_string(last));
    Shape out_shape = s;
    out_shape.back() = len;
    Tensor<T> out(out_shape);
    const std::size_t rows = a.numel() / last;
    const T* src = a.value().data();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < len; ++j) out[r * len + j] = src[r * last + start + j];
    return Var<T>::op("slice_last", std::move(out), {a}, [start, len, last, rows](GraphNode<T>& node) {
        auto& p = *node.parents[0];
        if (!p.requires_grad) return;
        T* da = p.ensure_grad().data();
        const T* g = node.grad.data();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < len; ++j) da[r * last + start + j] += g[r * len + j];
    });
}

// Select index `pos` on the second-to-last axis: (..., L, D) -> (..., D).
template <typename T>
Var<T> select_position(const Var<T>& a, std::size_t pos) {
    const Shape& s = a.shape();
    if (s.size() < 2) throw std::invalid_argument("select_position: rank must be >= 2");
    const std::size_t steps = s[s.size() - 2];
    const std::size_t width = s.back();
    if (pos >= steps) throw std::invalid_argument("select_position: index out of range");
    Shape out_shape(s.begin(), s.end() - 2);
    out_shape.push_back(width);
    Tensor<T> out(out_shape);
    const std::size_t batch = out.numel() / width;
    const T* src = a.value().data();
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t j = 0; j < width; ++j) out[b * width + j] = src[(b * steps + pos) * width + j];
    return Var<T>::op("select_position", std::move(out), {a},
                      [pos, steps, width, batch](GraphNode<T>& node) {
                          auto& p = *node.parents[0];
                          if (!p.requires_grad) return;
                          T* da = p.ensure_grad().data();
                          const T* g = node.grad.data();
                          for (std::size_t b = 0; b < batch; ++b)
                              for (std::size_t j = 0; j < width; ++j)
                                  da[(b * steps + pos) * width + j] += g[b * width + j];
                      });
}

// Mean over one axis, removing it. A mean over a singleton axis is identity.
template <typename T>
Var<T> mean_axis(const Var<T>& a, std::size_t axis) {
    const Shape& s = a.shape();
    if (axis >= s.size()) throw std::invalid_argument("mean_axis: axis out of range");
    const std::size_t axisn = s[axis];
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
    Shape out_shape;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (i != axis) out_shape.push_back(s[i]);
    if (out_shape.empty()) out_shape.push_back(1);
    Tensor<T> out(out_shape);
    const T* src = a.value().data();
    const T inv = T(1) / static_cast<T>(axisn);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i) {
            T acc = T(0);
            for (std::size_t x = 0; x < axisn; ++x) acc += src[(o * axisn + x) * inner + i];
            out[o * inner + i] = acc * inv;
        }
    return Var<T>::op("mean_axis", std::move(out), {a},
                      [outer, inner, axisn, inv](GraphNode<T>& node) {
                          auto& p = *node.parents[0];
                          if (!p.requires_grad) return;
                          T* da = p.ensure_grad().data();
                          const T* g = node.grad.data();
                          for (std::size_t o = 0; o < outer; ++o)
                              for (std::size_t x = 0; x < axisn; ++x)
                                  for (std::size_t i = 0; i < inner; ++i)
                                      da[(o * axisn + x) * inner + i] += g[o * inner + i] * inv;
                      });
}

// Numerically stable softmax over the last axis. Rejects NaN input.
template <typename T>
Var<T> softmax_last(const Var<T>& a) {
    const Shape& s = a.shape();
    if (s.empty()) throw std::invalid_argument("softmax_last: rank must be >= 1");
    const std::size_t width = s.back();
    const std::size_t rows = a.numel() / width;
    const T* src = a.value().data();
    Tensor<T> out(s);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* x = src + r * width;
        T mx = x[0];
        for (std::size_t j = 0; j < width; ++j) {
            if (std::isnan(static_cast<double>(x[j])))
                throw std::invalid_argument("softmax_last: NaN input");
            if (x[j] > mx) mx = x[j];
        }
        T denom = T(0);
        for (std::size_t j = 0; j < width; ++j) {
            const T e = std::exp(x[j] - mx);
            out[r * width + j] = e;
            denom += e;
        }
        const T inv = T(1) / denom;
        for (std::size_t j = 0; j < width; ++j) out[r * width + j] *= inv;
    }
    Tensor<T> saved = out;
    return Var<T>::op("softmax_last", std::move(out), {a},
                      [rows, width, y = std::move(saved)](GraphNode<T>& node) {
                          auto& p = *node.parents[0];
                          if (!p.requires_grad) return;
                          T* da = p.ensure_grad().data();
                          const T* g = node.grad.data();
                          for (std::size_t r = 0; r < rows; ++r) {
                              const T* gr = g + r * width;
                              const T* yr = y.data() + r * width;
                              T dot = T(0);
                              for (std::size_t j = 0; j < width; ++j) dot += gr[j] * yr[j];
                              T* dr = da + r * width;
                              for (std::size_t j = 0; j < width; ++j) dr[j] += (gr[j] - dot) * yr[j];
                          }
                      });
}

// Layer normalization over the last axis with affine parameters. Variance
// uses the 1/N convention.
template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps = T(1e-5)) {
    const Shape& s = x.shape();
    if (s.empty()) throw std::invalid_argument("layer_norm: rank must be >= 1");
    const std::size_t width = s.back();
    if (gamma.shape() != Shape{width} || beta.shape() != Shape{width})
        throw std::invalid_argument("layer_norm: gamma/beta must have shape (" +
                                    std::to_string(width) + ")");
    if (width == 1 && eps == T(0))
        throw std::invalid_argument("layer_norm: zero variance with eps=0 divides by zero");
    const std::size_t rows = x.numel() / width;
    const T* px = x.value().data();
    const T* pg = gamma.value().data();
    const T* pb = beta.value().data();
    Tensor<T> out(s);
    Tensor<T> xhat(s);
    std::vector<T> inv_std(rows);
    const T invw = T(1) / static_cast<T>(width);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* row = px + r * width;
        T mean = T(0);
        for (std::size_t j = 0; j < width; ++j) mean += row[j];
        mean *= invw;
        T var = T(0);
        for (std::size_t j = 0; j < width; ++j) {
            const T d = row[j] - mean;
            var += d * d;
        }
        var *= invw;
        const T inv = T(1) / std::sqrt(var + eps);
        inv_std[r] = inv;
        for (std::size_t j = 0; j < width; ++j) {
            const T xh = (row[j] - mean) * inv;
            xhat[r * width + j] = xh;
            out[r * width + j] = xh * pg[j] + pb[j];
        }
    }
    return Var<T>::op(
        "layer_norm", std::move(out), {x, gamma, beta},
        [rows, width, invw, xh = std::move(xhat), inv = std::move(inv_std)](GraphNode<T>& node) {
            auto& px_node = *node.parents[0];
            auto& pg_node = *node.parents[1];
            auto& pb_node = *node.parents[2];
            const T* g = node.grad.data();
            const T* gv = pg_node.value.data();
            for (std::size_t r = 0; r < rows; ++r) {
                const T* gr = g + r * width;
                const T* xr = xh.data() + r * width;
                if (px_node.requires_grad) {
                    T m1 = T(0), m2 = T(0);
                    for (std::size_t j = 0; j < width; ++j) {
                        const T gg = gr[j] * gv[j];
                        m1 += gg;
                        m2 += gg * xr[j];
                    }
                    m1 *= invw;
                    m2 *= invw;
                    T* dx = px_node.ensure_grad().data() + r * width;
                    for (std::size_t j = 0; j < width; ++j)
                        dx[j] += (gr[j] * gv[j] - m1 - xr[j] * m2) * inv[r];
                }
                if (pg_node.requires_grad) {
                    T* dg = pg_node.ensure_grad().data();
                    for (std::size_t j = 0; j < width; ++j) dg[j] += gr[j] * xr[j];
                }
                if (pb_node.requires_grad) {
                    T* db = pb_node.ensure_grad().data();
                    for (std::size_t j = 0; j < width; ++j) db[j] += gr[j];
                }
            }
        });
}

// Exact (erf-based) GELU.
template <typename T>
Var<T> gelu(const Var<T>& x) {
    Tensor<T> out(x.shape());
    const T* src = x.value().data();
    const T inv_sqrt2 = T(1) / std::sqrt(T(2));
    for (std::size_t i = 0; i < out.numel(); ++i)
        out[i] = T(0.5) * src[i] * (T(1) + std::erf(src[i] * inv_sqrt2));
    return Var<T>::op("gelu", std::move(out), {x}, [inv_sqrt2](GraphNode<T>& node) {
        auto& p = *node.parents[0];
        if (!p.requires_grad) return;
        const T inv_sqrt2pi = T(1) / std::sqrt(T(2) * T(M_PI));
        T* dx = p.ensure_grad().data();
        const T* g = node.grad.data();
        const T* xv = p.value.data();
        for (std::size_t i = 0; i < node.grad.numel(); ++i) {
            const T cdf = T(0.5) * (T(1) + std::erf(xv[i] * inv_sqrt2));
            const T pdf = std::exp(T(-0.5) * xv[i] * xv[i]) * inv_sqrt2pi;
            dx[i] += g[i] * (cdf + xv[i] * pdf);
        }
    });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
    Tensor<T> out(x.shape());
    const T* src = x.value().data();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = src[i] > T(0) ? src[i] : T(0);
    return Var<T>::op("relu", std::move(out), {x}, [](GraphNode<T>& node) {
        auto& p = *node.parents[0];
        if (!p.requires_grad) return;
        T* dx = p.ensure_grad().data();
        const T* g = node.grad.data();
        const T* xv = p.value.data();
        for (std::size_t i = 0; i < node.grad.numel(); ++i)
            if (xv[i] > T(0)) dx[i] += g[i];
    });
}

// table: (V, D); out shape = id_shape + (D,).
template <typename T>
Var<T> embedding_lookup(const Var<T>& table, const std::vector<std::int32_t>& ids, Shape id_shape) {
    if (table.shape().size() != 2) throw std::invalid_argument("embedding_lookup: table must be (V,D)");
    if (ids.size() != shape_numel(id_shape))
        throw std::invalid_argument("embedding_lookup: ids length does not match id_shape");
    const std::size_t vocab = table.shape()[0];
    const std::size_t width = table.shape()[1];
    for (std::int32_t id : ids)
        if (id < 0 || static_cast<std::size_t>(id) >= vocab)
            throw std::out_of_range("embedding_lookup: id " + std::to_string(id) +
                                    " out of vocabulary of size " + std::to_string(vocab));
    Shape out_shape = id_shape;
    out_shape.push_back(width);
    Tensor<T> out(out_shape);
    const T* tv = table.value().data();
    for (std::size_t p = 0; p < ids.size(); ++p)
        for (std::size_t j = 0; j < width; ++j)
            out[p * width + j] = tv[static_cast<std::size_t>(ids[p]) * width + j];
    return Var<T>::op("embedding_lookup", std::move(out), {table},
                      [ids, width](GraphNode<T>& node) {
                          auto& p = *node.parents[0];
                          if (!p.requires_grad) return;
                          T* dt = p.ensure_grad().data();
                          const T* g = node.grad.data();
                          for (std::size_t i = 0; i < ids.size(); ++i)
                              for (std::size_t j = 0; j < width; ++j)
                                  dt[static_cast<std::size_t>(ids[i]) * width + j] += g[i * width + j];
                      });
}

// Inverted-scaling dropout, active only when training is set.
template <typename T>
Var<T> dropout(const Var<T>& x, double rate, Rng& rng, bool training) {
    if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0, 1)");
    if (!training || rate == 0.0) return x;
    const T inv_keep = T(1.0 / (1.0 - rate));
    std::vector<T> mask(x.numel());
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask[i] = rng.uniform() >= rate ? inv_keep : T(0);
    Tensor<T> out(x.shape());
    const T* src = x.value().data();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = src[i] * mask[i];
    return Var<T>::op("dropout", std::move(out), {x}, [mask = std::move(mask)](GraphNode<T>& node) {
        auto& p = *node.parents[0];
        if (!p.requires_grad) return;
        T* dx = p.ensure_grad().data();
        const T* g = node.grad.data();
        for (std::size_t i = 0; i < node.grad.numel(); ++i) dx[i] += g[i] * mask[i];
    });
}

// Mean cross-entropy from raw logits. logits: (..., K) flattened to rows;
// targets of ignore_index are excluded from the mean. class_weights, when
// nonempty, weight each counted row by the weight of its target class.
// Zero counted rows yields a 0 loss with a warning.
template <typename T>
Var<T> cross_entropy_logits(const Var<T>& logits, const std::vector<std::int32_t>& targets,
                            std::int32_t ignore_index = -1, std::vector<T> class_weights = {}) {
    const Shape& s = logits.shape();
    if (s.size() < 2) throw std::invalid_argument("cross_entropy_logits: logits rank must be >= 2");
    const std::size_t k = s.back();
    const std::size_t rows = logits.numel() / k;
    if (targets.size() != rows)
        throw std::invalid_argument("cross_entropy_logits: expected " + std::to_string(rows) +
                                    " targets, got " + std::to_string(targets.size()));
    if (!class_weights.empty() && class_weights.size() != k)
        throw std::invalid_argument("cross_entropy_logits: class_weights length mismatch");
    const T* x = logits.value().data();
    double total = 0.0;
    double weight_sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::int32_t t = targets[r];
        if (t == ignore_index) continue;
        if (t < 0 || static_cast<std::size_t>(t) >= k)
            throw std::out_of_range("cross_entropy_logits: class " + std::to_string(t) +
                                    " out of range [0," + std::to_string(k) + ") at row " +
                                    std::to_string(r));
        const T* row = x + r * k;
        T mx = row[0];
        for (std::size_t j = 1; j < k; ++j)
            if (row[j] > mx) mx = row[j];
        double denom = 0.0;
        for (std::size_t j = 0; j < k; ++j) denom += std::exp(static_cast<double>(row[j] - mx));
        const double lse = std::log(denom) + static_cast<double>(mx);
        const double w = class_weights.empty() ? 1.0 : static_cast<double>(class_weights[t]);
        total += w * (lse - static_cast<double>(row[t]));
        weight_sum += w;
        ++counted;
    }
    if (counted == 0) {
        std::cerr << "warning: cross_entropy_logits: no target positions, loss defined as 0\n";
        return Var<T>::op("cross_entropy", Tensor<T>::scalar(T(0)), {logits}, [](GraphNode<T>&) {});
    }
    Tensor<T> out = Tensor<T>::scalar(static_cast<T>(total / weight_sum));
    return Var<T>::op(
        "cross_entropy", std::move(out), {logits},
        [rows, k, targets, ignore_index, weights = std::move(class_weights),
         weight_sum](GraphNode<T>& node) {
            auto& p = *node.parents[0];
            if (!p.requires_grad) return;
            T* dx = p.ensure_grad().data();
            const T* x = p.value.data();
            const T g0 = node.grad[0];
            for (std::size_t r = 0; r < rows; ++r) {
                const std::int32_t t = targets[r];
                if (t == ignore_index) continue;
                const T* row = x + r * k;
                T mx = row[0];
                for (std::size_t j = 1; j < k; ++j)
                    if (row[j] > mx) mx = row[j];
                double denom = 0.0;
                for (std::size_t j = 0; j < k; ++j) denom += std::exp(static_cast<double>(row[j] - mx));
                const double w = weights.empty() ? 1.0 : static_cast<double>(weights[t]);
                const T coeff = static_cast<T>(static_cast<double>(g0) * w / weight_sum);
                T* dr = dx + r * k;
                for (std::size_t j = 0; j < k; ++j) {
                    const T soft = static_cast<T>(std::exp(static_cast<double>(row[j] - mx)) / denom);
                    dr[j] += coeff * (soft - (static_cast<std::size_t>(t) == j ? T(1) : T(0)));
                }
            }
        });
}

} // namespace edos
