#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "core/nn.hpp"
#include "core/tape.hpp"
#include "testutil.hpp"

using namespace umic;
using umic::test::fd_check;
using umic::test::random_tensor;

namespace {
Rng g_rng(7);

Var weighted_sum(Tape& t, Var x, uint64_t seed) {
    // project output to a scalar with fixed random weights so every output
    // element participates in the loss
    Rng r(seed);
    Tensor w(t.val(x).shape);
    r.fill_gaussian(w.ptr(), size_t(w.numel()));
    return sum_all(t, mul(t, x, t.constant(w)));
}
}  // namespace

TEST_CASE("elementwise and broadcast gradients") {
    auto run = [&](auto op, std::vector<int64_t> sa, std::vector<int64_t> sb) {
        double err = fd_check(
            [&](Tape& t, const std::vector<Var>& in) {
                return weighted_sum(t, op(t, in[0], in[1]), 99);
            },
            {random_tensor(sa, g_rng), random_tensor(sb, g_rng)});
        CHECK(err < 1e-6);
    };
    run([](Tape& t, Var a, Var b) { return add(t, a, b); }, {2, 3, 4}, {2, 3, 4});
    run([](Tape& t, Var a, Var b) { return sub(t, a, b); }, {2, 3, 4}, {2, 3, 4});
    run([](Tape& t, Var a, Var b) { return mul(t, a, b); }, {2, 3, 4}, {2, 3, 4});
    // broadcasts
    run([](Tape& t, Var a, Var b) { return add(t, a, b); }, {2, 3, 4}, {1, 3, 1});
    run([](Tape& t, Var a, Var b) { return mul(t, a, b); }, {2, 3, 4}, {2, 1, 4});
    run([](Tape& t, Var a, Var b) { return mul(t, a, b); }, {1, 1, 4}, {2, 3, 4});
}

TEST_CASE("unary gradients") {
    auto run = [&](auto op, double scale = 1.0, double shift = 0.0) {
        Tensor in = random_tensor({3, 5}, g_rng, scale);
        for (double& v : in.data) v += shift;
        double err = fd_check(
            [&](Tape& t, const std::vector<Var>& vars) {
                return weighted_sum(t, op(t, vars[0]), 5);
            },
            {in});
        CHECK(err < 1e-6);
    };
    run([](Tape& t, Var a) { return neg(t, a); });
    run([](Tape& t, Var a) { return silu(t, a); });
    run([](Tape& t, Var a) { return sigmoid(t, a); });
    run([](Tape& t, Var a) { return exp_op(t, a); }, 0.5);
    run([](Tape& t, Var a) { return log_op(t, a); }, 0.1, 3.0);   // positive
    run([](Tape& t, Var a) { return sqrt_op(t, a); }, 0.1, 3.0);  // positive
    run([](Tape& t, Var a) { return square(t, a); });
    run([](Tape& t, Var a) { return scalar_mul(t, a, -2.5); });
    run([](Tape& t, Var a) { return scalar_add(t, a, 1.25); });
    run([](Tape& t, Var a) { return abs_op(t, a); }, 1.0, 2.0);        // away from 0
    run([](Tape& t, Var a) { return relu(t, a); }, 1.0, 2.0);          // away from 0
    run([](Tape& t, Var a) { return leaky_relu(t, a, 0.2); }, 1.0, 2.0);
}

TEST_CASE("shape op gradients") {
    Tensor in = random_tensor({2, 3, 4}, g_rng);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, reshape(t, v[0], {4, 6}), 2);
              },
              {in}) < 1e-6);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, permute(t, v[0], {2, 0, 1}), 3);
              },
              {in}) < 1e-6);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, slice(t, v[0], 1, 1, 2), 4);
              },
              {in}) < 1e-6);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, concat(t, {v[0], v[1]}, 1), 5);
              },
              {random_tensor({2, 2, 4}, g_rng), random_tensor({2, 3, 4}, g_rng)}) <
          1e-6);
}

TEST_CASE("reduction gradients") {
    Tensor in = random_tensor({3, 4, 5}, g_rng);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) { return sum_all(t, v[0]); },
              {in}) < 1e-6);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) { return mean_all(t, v[0]); },
              {in}) < 1e-6);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, mean_axis(t, v[0], 1), 6);
              },
              {in}) < 1e-6);
}

TEST_CASE("matmul and linear gradients") {
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, matmul(t, v[0], v[1]), 7);
              },
              {random_tensor({3, 4}, g_rng), random_tensor({4, 5}, g_rng)}) < 1e-6);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, matmul(t, v[0], v[1]), 8);
              },
              {random_tensor({2, 3, 4}, g_rng), random_tensor({2, 4, 5}, g_rng)}) <
          1e-6);
    // shared rank-2 rhs
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, matmul(t, v[0], v[1]), 9);
              },
              {random_tensor({2, 3, 4}, g_rng), random_tensor({4, 5}, g_rng)}) < 1e-6);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, linear(t, v[0], v[1], v[2]), 10);
              },
              {random_tensor({2, 3, 4}, g_rng), random_tensor({6, 4}, g_rng),
               random_tensor({6}, g_rng)}) < 1e-6);
}

TEST_CASE("softmax gradient") {
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, softmax_lastdim(t, v[0]), 11);
              },
              {random_tensor({3, 6}, g_rng)}) < 1e-6);
}

TEST_CASE("conv2d gradients") {
    for (int stride : {1, 2}) {
        double err = fd_check(
            [&](Tape& t, const std::vector<Var>& v) {
                return weighted_sum(t, conv2d(t, v[0], v[1], v[2], stride, 1), 12);
            },
            {random_tensor({2, 3, 6, 6}, g_rng), random_tensor({4, 3, 3, 3}, g_rng),
             random_tensor({4}, g_rng)});
        CHECK(err < 1e-6);
    }
    // 1x1, no pad
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, conv2d(t, v[0], v[1], v[2], 1, 0), 13);
              },
              {random_tensor({1, 4, 5, 5}, g_rng), random_tensor({2, 4, 1, 1}, g_rng),
               random_tensor({2}, g_rng)}) < 1e-6);
}

TEST_CASE("pool / upsample / mean_hw gradients") {
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, avg_pool2d(t, v[0], 2, 2), 14);
              },
              {random_tensor({2, 3, 6, 6}, g_rng)}) < 1e-6);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, avg_pool2d(t, v[0], 3, 1), 15);
              },
              {random_tensor({1, 2, 7, 7}, g_rng)}) < 1e-6);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, upsample_nearest2(t, v[0]), 16);
              },
              {random_tensor({2, 3, 4, 4}, g_rng)}) < 1e-6);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, mean_hw(t, v[0]), 17);
              },
              {random_tensor({2, 3, 4, 4}, g_rng)}) < 1e-6);
}

TEST_CASE("norm gradients") {
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, group_norm(t, v[0], 2, v[1], v[2]), 18);
              },
              {random_tensor({2, 4, 3, 3}, g_rng), random_tensor({4}, g_rng, 0.5),
               random_tensor({4}, g_rng, 0.5)}) < 5e-6);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, layer_norm(t, v[0], v[1], v[2]), 19);
              },
              {random_tensor({4, 6}, g_rng), random_tensor({6}, g_rng, 0.5),
               random_tensor({6}, g_rng, 0.5)}) < 5e-6);
}

TEST_CASE("embedding gradient") {
    std::vector<int64_t> ids = {0, 2, 2, 1};
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return weighted_sum(t, embedding(t, v[0], ids), 20);
              },
              {random_tensor({3, 5}, g_rng)}) < 1e-6);
}

TEST_CASE("attention layer gradient") {
    Rng rng(21);
    ParamStore ps;
    AttentionLayer attn;
    attn.init(ps, "attn", 8, 2, rng);
    // zero-init out projection would kill the gradient signal; randomize it
    for (auto& p : ps.all())
        if (p.value.numel() && p.name == "attn.out.w")
            rng.fill_gaussian(p.value.ptr(), size_t(p.value.numel()));

    Tensor q0 = random_tensor({2, 3, 8}, rng);
    Tensor m0 = random_tensor({2, 4, 8}, rng);
    std::vector<Tensor> inputs = {q0, m0};
    for (const auto& p : ps.all()) inputs.push_back(p.value);

    double err = fd_check(
        [&](Tape& t, const std::vector<Var>& v) {
            ParamStore local = ps;
            // bind leaves provided by fd_check so weights are perturbed too
            for (size_t i = 0; i < local.all().size(); ++i)
                local.all()[i].var = v[i + 2];
            return weighted_sum(t, attn.fwd(t, local, v[0], v[1]), 22);
        },
        inputs);
    CHECK(err < 1e-3);
}

TEST_CASE("loss helpers") {
    Rng rng(30);
    Tensor a = random_tensor({2, 5}, rng);
    Tensor b = random_tensor({2, 5}, rng);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return mse_loss(t, v[0], v[1]);
              },
              {a, b}) < 1e-6);
    CHECK(fd_check(
              [&](Tape& t, const std::vector<Var>& v) {
                  return l1_loss(t, v[0], v[1]);
              },
              {a, b}) < 1e-6);

    // value checks
    Tape t;
    Var va = t.constant(Tensor::from_vec({3}, {1.0, 2.0, 3.0}));
    Var vb = t.constant(Tensor::from_vec({3}, {1.5, 2.5, 3.5}));
    CHECK(t.val(mse_loss(t, va, vb)).item() == doctest::Approx(0.25));
    CHECK(t.val(l1_loss(t, va, vb)).item() == doctest::Approx(0.5));
}

TEST_CASE("no-grad tape records values only") {
    Tape t(false);
    Rng rng(1);
    Var a = t.leaf(random_tensor({4, 4}, rng), true);
    Var b = silu(t, a);
    CHECK(t.val(b).numel() == 16);
    CHECK(!t.needs_grad(b));
}

TEST_CASE("gradient accumulates over reused variables") {
    Tape t;
    Var a = t.leaf(Tensor::from_vec({2}, {3.0, 4.0}), true);
    Var y = add(t, a, a);  // y = 2a
    Var loss = sum_all(t, y);
    t.backward(loss);
    CHECK(t.grad(a).data[0] == doctest::Approx(2.0));
    CHECK(t.grad(a).data[1] == doctest::Approx(2.0));
}
