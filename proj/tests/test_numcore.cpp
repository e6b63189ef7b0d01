#include <doctest.h>

#include <cmath>
#include <limits>

#include "edos/grad_check.hpp"
#include "edos/ops.hpp"
#include "test_util.hpp"

using namespace edos;
using namespace edos::testutil;
using doctest::Approx;

using D = double;

TEST_CASE("rng: determinism and split independence") {
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    // A child stream does not depend on how much the parent has drawn.
    Rng parent1(3), parent2(3);
    (void)parent2.next_u64();
    (void)parent2.next_u64();
    Rng c1 = parent1.split("stream");
    Rng c2 = parent2.split("stream");
    CHECK(c1.next_u64() == c2.next_u64());

    Rng u(11);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        CHECK(u.uniform_int(7) < 7);
    }
    CHECK_THROWS_AS(u.uniform_int(0), std::invalid_argument);
}

TEST_CASE("rng: normal moments") {
    Rng r(5);
    double sum = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        sum += x;
        sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("tensor: shape and data invariants") {
    Tensor<float> t({2, 3});
    CHECK(t.numel() == 6);
    CHECK(t.rank() == 2);
    CHECK_THROWS_AS(Tensor<float>({2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor<float>({2}, {1.0f, 2.0f, 3.0f}), std::invalid_argument);
}

TEST_CASE("softmax: closed forms and stability") {
    auto run = [](std::vector<D> v) {
        auto x = Var<D>::leaf(Tensor<D>({1, v.size()}, std::move(v)));
        return softmax_last(x).value();
    };
    auto r1 = run({0.0, 0.0});
    CHECK(r1[0] == Approx(0.5).epsilon(1e-9));
    CHECK(r1[1] == Approx(0.5).epsilon(1e-9));

    auto r2 = run({std::log(2.0), 0.0});
    CHECK(r2[0] == Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(r2[1] == Approx(1.0 / 3.0).epsilon(1e-9));

    auto r3 = run({1000.0, 0.0});
    CHECK(r3[0] == Approx(1.0).epsilon(1e-12));
    CHECK(r3[1] == Approx(0.0).epsilon(1e-12));
    CHECK(std::isfinite(r3[0]));

    auto nan_input = Var<D>::leaf(
        Tensor<D>({1, 2}, {std::numeric_limits<D>::quiet_NaN(), 0.0}));
    CHECK_THROWS_AS(softmax_last(nan_input), std::invalid_argument);
}

TEST_CASE("softmax: row sums and shift invariance over random rows") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        auto x = Var<D>::leaf(rand_tensor<D>(rng, {3, 5}, -4.0, 4.0));
        auto y = softmax_last(x).value();
        for (std::size_t r = 0; r < 3; ++r) {
            double sum = 0.0;
            for (std::size_t j = 0; j < 5; ++j) sum += y[r * 5 + j];
            CHECK(sum == Approx(1.0).epsilon(1e-6));
        }
        // adding a constant to one row leaves values unchanged
        Tensor<D> shifted = x.value();
        for (std::size_t j = 0; j < 5; ++j) shifted[j] += 3.25;
        auto y2 = softmax_last(Var<D>::leaf(shifted)).value();
        for (std::size_t j = 0; j < 5; ++j) CHECK(y2[j] == Approx(y[j]).epsilon(1e-9));
    }
}

TEST_CASE("layer_norm: hand cases") {
    auto gamma = Var<D>::leaf(Tensor<D>::full({2}, 1.0));
    auto beta = Var<D>::leaf(Tensor<D>({2}));

    auto constant_row = Var<D>::leaf(Tensor<D>({1, 2}, {4.0, 4.0}));
    auto z = layer_norm(constant_row, gamma, beta).value();
    CHECK(z[0] == Approx(0.0).epsilon(1e-9));
    CHECK(z[1] == Approx(0.0).epsilon(1e-9));

    auto row = Var<D>::leaf(Tensor<D>({1, 2}, {1.0, 3.0}));
    auto y = layer_norm(row, gamma, beta).value();
    CHECK(y[0] == Approx(-1.0).epsilon(1e-4));
    CHECK(y[1] == Approx(1.0).epsilon(1e-4));

    auto gamma0 = Var<D>::leaf(Tensor<D>({2}));
    auto beta5 = Var<D>::leaf(Tensor<D>::full({2}, 5.0));
    auto y5 = layer_norm(row, gamma0, beta5).value();
    CHECK(y5[0] == Approx(5.0));
    CHECK(y5[1] == Approx(5.0));

    auto single = Var<D>::leaf(Tensor<D>({1, 1}, {2.0}));
    auto g1 = Var<D>::leaf(Tensor<D>::full({1}, 1.0));
    auto b1 = Var<D>::leaf(Tensor<D>({1}));
    CHECK_THROWS_AS(layer_norm(single, g1, b1, 0.0), std::invalid_argument);
}

TEST_CASE("layer_norm: pre-affine rows have mean 0 and variance 1") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed + 100);
        const std::size_t d = 6;
        auto gamma = Var<D>::leaf(Tensor<D>::full({d}, 1.0));
        auto beta = Var<D>::leaf(Tensor<D>({d}));
        auto x = Var<D>::leaf(rand_tensor<D>(rng, {4, d}, -3.0, 3.0));
        auto y = layer_norm(x, gamma, beta).value();
        for (std::size_t r = 0; r < 4; ++r) {
            double mean = 0.0, var = 0.0;
            for (std::size_t j = 0; j < d; ++j) mean += y[r * d + j];
            mean /= d;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = y[r * d + j] - mean;
                var += diff * diff;
            }
            var /= d;
            CHECK(std::abs(mean) < 1e-5);
            CHECK(var == Approx(1.0).epsilon(1e-4));
        }
    }
}

TEST_CASE("backward: closed forms, accumulation, scalar guard") {
    ParamStore<D> params;
    auto& w = params.add("w", Tensor<D>({2}, {1.0, 2.0}));
    auto loss = sum_all(mul(w, w));
    CHECK(loss.value()[0] == Approx(5.0));
    backward(loss);
    CHECK(w.grad()[0] == Approx(2.0));
    CHECK(w.grad()[1] == Approx(4.0));

    // repeated backward accumulates
    backward(loss);
    CHECK(w.grad()[0] == Approx(4.0));
    CHECK(w.grad()[1] == Approx(8.0));

    // constant w.r.t. w: gradient is zero
    params.zero_grad();
    auto c = constant(Tensor<D>::scalar(3.0));
    backward(scale(c, 2.0));
    CHECK_FALSE(w.has_grad());

    auto vec = Var<D>::leaf(Tensor<D>({3}), true);
    CHECK_THROWS_AS(backward(vec), std::invalid_argument);
}

TEST_CASE("matmul: hand case, batching and broadcast") {
    auto a = Var<D>::leaf(Tensor<D>({2, 2}, {1, 2, 3, 4}));
    auto b = Var<D>::leaf(Tensor<D>({2, 2}, {5, 6, 7, 8}));
    auto c = matmul(a, b).value();
    CHECK(c[0] == Approx(19));
    CHECK(c[1] == Approx(22));
    CHECK(c[2] == Approx(43));
    CHECK(c[3] == Approx(50));

    auto ct = matmul(a, b, false, true).value(); // A Bᵀ
    CHECK(ct[0] == Approx(1 * 5 + 2 * 6));
    CHECK(ct[1] == Approx(1 * 7 + 2 * 8));

    // batched x (2,2,3) @ w (3,2) broadcast
    Rng rng(1);
    auto x = Var<D>::leaf(rand_tensor<D>(rng, {2, 2, 3}));
    auto w = Var<D>::leaf(rand_tensor<D>(rng, {3, 2}));
    auto y = matmul(x, w).value();
    CHECK(y.shape() == Shape{2, 2, 2});
    for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < 3; ++k)
                    acc += x.value()[(s * 2 + i) * 3 + k] * w.value()[k * 2 + j];
                CHECK(y[(s * 2 + i) * 2 + j] == Approx(acc).epsilon(1e-12));
            }

    CHECK_THROWS_AS(matmul(a, Var<D>::leaf(Tensor<D>({3, 2}))), std::invalid_argument);
}

TEST_CASE("concat/slice: exact recovery; mean over singleton axis is identity") {
    Rng rng(2);
    auto a = Var<D>::leaf(rand_tensor<D>(rng, {2, 3}));
    auto b = Var<D>::leaf(rand_tensor<D>(rng, {2, 2}));
    auto cat = concat_last<D>({a, b});
    CHECK(cat.shape() == Shape{2, 5});
    auto back_a = slice_last(cat, 0, 3).value();
    auto back_b = slice_last(cat, 3, 2).value();
    for (std::size_t i = 0; i < 6; ++i) CHECK(back_a[i] == a.value()[i]);
    for (std::size_t i = 0; i < 4; ++i) CHECK(back_b[i] == b.value()[i]);

    auto x = Var<D>::leaf(rand_tensor<D>(rng, {3, 1, 4}));
    auto m = mean_axis(x, 1).value();
    CHECK(m.shape() == Shape{3, 4});
    for (std::size_t i = 0; i < 12; ++i) CHECK(m[i] == x.value()[i]);
}

TEST_CASE("cross entropy: closed forms") {
    auto uniform = Var<D>::leaf(Tensor<D>({1, 4}));
    CHECK(cross_entropy_logits(uniform, {0}).value()[0] == Approx(std::log(4.0)).epsilon(1e-12));

    auto confident = Var<D>::leaf(Tensor<D>({1, 4}, {10, 0, 0, 0}));
    CHECK(cross_entropy_logits(confident, {0}).value()[0] == Approx(1.3619051e-4).epsilon(1e-5));

    auto wrong = Var<D>::leaf(Tensor<D>({1, 4}, {0, 10, 0, 0}));
    CHECK(cross_entropy_logits(wrong, {0}).value()[0] == Approx(10.00013619).epsilon(1e-9));

    auto sharp = Var<D>::leaf(Tensor<D>({1, 100}));
    sharp.value()[7] = 30.0;
    CHECK(cross_entropy_logits(sharp, {7}).value()[0] < 1e-9);

    CHECK_THROWS_AS(cross_entropy_logits(uniform, {4}), std::out_of_range);
    CHECK_THROWS_AS(cross_entropy_logits(uniform, {0, 1}), std::invalid_argument);

    // all positions ignored: loss defined as zero
    CHECK(cross_entropy_logits(uniform, {-1}).value()[0] == 0.0);

    // batched mean
    auto two = Var<D>::leaf(Tensor<D>({2, 4}));
    const double expect = std::log(4.0);
    CHECK(cross_entropy_logits(two, {1, 2}).value()[0] == Approx(expect).epsilon(1e-12));
}

TEST_CASE("grad_check: every primitive at randomized shapes, 20 seeds") {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed * 7919 + 1);
        const std::size_t m = 2 + rng.uniform_int(3);
        const std::size_t k = 2 + rng.uniform_int(3);
        const std::size_t n = 2 + rng.uniform_int(3);
        const std::size_t batch = 1 + rng.uniform_int(2);
        Rng wrng = rng.split("weights");

        {
            ParamStore<D> p;
            auto& a = p.add("a", rand_tensor<D>(rng, {batch, m, k}));
            auto& b = p.add("b", rand_tensor<D>(rng, {batch, k, n}));
            auto& w = p.add("w", rand_tensor<D>(rng, {k, n}));
            auto f = [&] {
                auto c1 = matmul(a, b);                    // batched
                auto c2 = matmul(a, w);                    // broadcast
                auto c3 = matmul(a, b, false, false);
                return add(weighted_sum(c1, wrng), add(weighted_sum(c2, wrng),
                                                       weighted_sum(c3, wrng)));
            };
            worst = std::max(worst, grad_check<D>(f, p));
        }
        {
            // transpose flags
            ParamStore<D> p;
            auto& a = p.add("a", rand_tensor<D>(rng, {m, k}));
            auto& b = p.add("b", rand_tensor<D>(rng, {n, k}));
            auto& c = p.add("c", rand_tensor<D>(rng, {k, m}));
            auto& d = p.add("d", rand_tensor<D>(rng, {k, n}));
            auto f = [&] {
                auto y1 = matmul(a, b, false, true);  // (m,n)
                auto y2 = matmul(c, b, true, true);   // (m,n)
                auto y3 = matmul(c, d, true, false);  // (m,n)
                return add(weighted_sum(y1, wrng),
                           add(weighted_sum(y2, wrng), weighted_sum(y3, wrng)));
            };
            worst = std::max(worst, grad_check<D>(f, p));
        }
        {
            ParamStore<D> p;
            auto& a = p.add("a", rand_tensor<D>(rng, {batch, m, n}));
            auto& b = p.add("b", rand_tensor<D>(rng, {n}));
            auto& c = p.add("c", rand_tensor<D>(rng, {m, n}));
            auto f = [&] {
                return add(weighted_sum(add(a, b), wrng),
                           add(weighted_sum(mul(a, c), wrng),
                               weighted_sum(scale(add(a, c), 1.7), wrng)));
            };
            worst = std::max(worst, grad_check<D>(f, p));
        }
        {
            ParamStore<D> p;
            auto& a = p.add("a", rand_tensor<D>(rng, {m, k}));
            auto& b = p.add("b", rand_tensor<D>(rng, {m, n}));
            auto f = [&] {
                auto cat = concat_last<D>({a, b});
                auto s1 = slice_last(cat, 1, k - 1 + n);
                auto sel = select_position(cat, 1); // second row... axis -2 selects row
                return add(weighted_sum(s1, wrng), weighted_sum(sel, wrng));
            };
            worst = std::max(worst, grad_check<D>(f, p));
        }
        {
            ParamStore<D> p;
            auto& a = p.add("a", rand_tensor<D>(rng, {batch, m, n}));
            auto f = [&] {
                return add(weighted_sum(mean_axis(a, 1), wrng),
                           add(weighted_sum(mean_axis(a, 0), wrng),
                               weighted_sum(softmax_last(a), wrng)));
            };
            worst = std::max(worst, grad_check<D>(f, p));
        }
        {
            ParamStore<D> p;
            auto& x = p.add("x", rand_tensor<D>(rng, {m, n}));
            auto& g = p.add("g", rand_tensor<D>(rng, {n}, 0.5, 1.5));
            auto& b = p.add("b", rand_tensor<D>(rng, {n}));
            auto f = [&] { return weighted_sum(layer_norm(x, g, b), wrng); };
            worst = std::max(worst, grad_check<D>(f, p));
        }
        {
            ParamStore<D> p;
            auto& x = p.add("x", rand_tensor_nonzero<D>(rng, {m, n}));
            auto f = [&] {
                return add(weighted_sum(gelu(x), wrng), weighted_sum(relu(x), wrng));
            };
            worst = std::max(worst, grad_check<D>(f, p));
        }
        {
            ParamStore<D> p;
            auto& table = p.add("table", rand_tensor<D>(rng, {5, n}));
            std::vector<std::int32_t> ids = {0, 3, 3, 1};
            auto f = [&] { return weighted_sum(embedding_lookup(table, ids, {2, 2}), wrng); };
            worst = std::max(worst, grad_check<D>(f, p));
        }
        {
            // dropout with a fixed stream is deterministic and checkable
            ParamStore<D> p;
            auto& x = p.add("x", rand_tensor<D>(rng, {m, n}));
            const std::uint64_t dseed = seed + 5000;
            auto f = [&] {
                Rng drop(dseed);
                return weighted_sum(dropout(x, 0.3, drop, true), wrng);
            };
            worst = std::max(worst, grad_check<D>(f, p));
        }
        {
            ParamStore<D> p;
            auto& logits = p.add("logits", rand_tensor<D>(rng, {4, n}, -2.0, 2.0));
            std::vector<std::int32_t> targets = {0, -1, static_cast<std::int32_t>(n - 1), 1};
            std::vector<D> weights(n, 1.0);
            weights[0] = 2.5;
            auto f = [&] {
                return add(cross_entropy_logits(logits, targets, -1),
                           cross_entropy_logits(logits, targets, -1, weights));
            };
            worst = std::max(worst, grad_check<D>(f, p));
        }
    }
    CHECK(worst < 1e-4);
    MESSAGE("primitive grad check worst relative error: ", worst);
}

TEST_CASE("grad_check: linear functions are exact to near machine precision") {
    ParamStore<D> p;
    Rng rng(77);
    auto& w = p.add("w", rand_tensor<D>(rng, {3, 3}));
    Rng wrng = rng.split("w");
    auto f = [&] { return weighted_sum(scale(w, 2.0), wrng); };
    CHECK(grad_check<D>(f, p) < 1e-9);
}

TEST_CASE("grad_check: flags a deliberately wrong derivative") {
    ParamStore<D> p;
    Rng rng(9);
    auto& w = p.add("w", rand_tensor<D>(rng, {2, 3}, 0.5, 1.5));
    auto bad_square = [](const Var<D>& x) {
        Tensor<D> out(x.shape());
        for (std::size_t i = 0; i < out.numel(); ++i) out[i] = x.value()[i] * x.value()[i];
        return Var<D>::op("bad_square", std::move(out), {x}, [](GraphNode<D>& node) {
            auto& parent = *node.parents[0];
            if (!parent.requires_grad) return;
            D* dx = parent.ensure_grad().data();
            for (std::size_t i = 0; i < node.grad.numel(); ++i)
                dx[i] += node.grad[i] * 1.7 * parent.value[i]; // wrong: should be 2x
        });
    };
    Rng wrng = rng.split("w");
    auto f = [&] { return weighted_sum(bad_square(w), wrng); };
    CHECK(grad_check<D>(f, p) > 1e-2);
}

TEST_CASE("grad_check: rejects non-deterministic functions") {
    ParamStore<D> p;
    Rng rng(13);
    auto& w = p.add("w", rand_tensor<D>(rng, {2, 2}));
    Rng noisy(1);
    auto f = [&] {
        Tensor<D> jitter(w.shape());
        for (std::size_t i = 0; i < jitter.numel(); ++i) jitter[i] = noisy.uniform();
        return sum_all(mul(w, constant(std::move(jitter))));
    };
    CHECK_THROWS_AS(grad_check<D>(f, p), std::runtime_error);
}
