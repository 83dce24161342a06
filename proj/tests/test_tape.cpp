#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "gegcn/errors.hpp"
#include "gegcn/tape.hpp"
#include "grad_check.hpp"

using namespace gegcn;
using namespace gegcn::test;

namespace {

Tensor random_tensor(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
    Tensor t(rows, cols);
    for (auto& x : t.raw()) x = rng.uniform(lo, hi);
    return t;
}

// magnitudes bounded away from zero, for kinked ops like relu
Tensor random_tensor_away_from_zero(Rng& rng, int rows, int cols) {
    Tensor t(rows, cols);
    for (auto& x : t.raw()) {
        const double mag = rng.uniform(0.05, 1.5);
        x = rng.bernoulli(0.5) ? mag : -mag;
    }
    return t;
}

}  // namespace

TEST_CASE("analytic spot checks") {
    SUBCASE("matmul by identity is identity, gradient passes through") {
        Rng rng(1);
        Parameter x(random_tensor(rng, 3, 3));
        Tape t;
        Var xv = t.param(x);
        Var y = t.matmul(t.constant(Tensor::identity(3)), xv);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) CHECK(t.value(y).at(i, j) == x.value.at(i, j));
        }
        Var loss = t.sum_all(y);
        t.backward(loss);
        for (double g : x.grad.raw()) CHECK(g == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("sigmoid at 0") {
        Parameter x(Tensor::scalar(0.0));
        Tape t;
        Var y = t.sigmoid(t.param(x));
        CHECK(t.value(y).item() == 0.5);
        t.backward(y);
        CHECK(x.grad.item() == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("x^2 at 3 has gradient 6") {
        Parameter x(Tensor::scalar(3.0));
        Tape t;
        Var xv = t.param(x);
        t.backward(t.mul(xv, xv));
        CHECK(x.grad.item() == doctest::Approx(6.0).epsilon(1e-12));
    }
    SUBCASE("fan-out accumulates: d(x+x)/dx = 2") {
        Parameter x(Tensor::scalar(1.5));
        Tape t;
        Var xv = t.param(x);
        t.backward(t.add(xv, xv));
        CHECK(x.grad.item() == 2.0);
    }
}

TEST_CASE("state and shape errors") {
    Parameter x(Tensor::scalar(1.0));
    SUBCASE("backward twice without reset") {
        Tape t;
        Var v = t.param(x);
        t.backward(v);
        CHECK_THROWS_AS(t.backward(v), StateError);
        t.reset();
        Var v2 = t.param(x);
        CHECK_NOTHROW(t.backward(v2));
    }
    SUBCASE("non-scalar loss") {
        Tape t;
        Parameter y(Tensor(2, 2));
        CHECK_THROWS_AS(t.backward(t.param(y)), DimensionError);
    }
    SUBCASE("mismatched shapes carry both in the message") {
        Tape t;
        Parameter a(Tensor(2, 3)), b(Tensor(3, 3));
        CHECK_THROWS_WITH_AS(t.add(t.param(a), t.param(b)), doctest::Contains("[2x3]"), DimensionError);
        CHECK_THROWS_AS(t.matmul(t.param(a), t.param(a)), DimensionError);
        CHECK_THROWS_AS(t.add_rowvec(t.param(a), t.param(b)), DimensionError);
    }
}

TEST_CASE("randomized finite-difference checks per primitive") {
    Rng rng(20240);
    double worst = 0.0;
    long checked = 0;
    auto run = [&](const std::vector<Parameter*>& params, const std::function<Var(Tape&)>& build) {
        auto res = check_gradients(params, build);
        worst = std::max(worst, res.max_rel_err);
        checked += res.checked;
        CHECK(res.max_rel_err < 1e-5);
    };

    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng.index(3));
        const int k = 2 + static_cast<int>(rng.index(3));
        const int m = 2 + static_cast<int>(rng.index(3));

        {
            Parameter a(random_tensor(rng, n, k)), b(random_tensor(rng, k, m));
            Tensor cot = random_tensor(rng, n, m);
            run({&a, &b}, [&](Tape& t) {
                return t.sum_all(t.mul(t.matmul(t.param(a), t.param(b)), t.constant(cot)));
            });
        }
        {
            Parameter a(random_tensor(rng, n, m)), b(random_tensor(rng, n, m));
            Tensor cot = random_tensor(rng, n, m);
            run({&a, &b}, [&](Tape& t) {
                return t.sum_all(t.mul(t.add(t.param(a), t.param(b)), t.constant(cot)));
            });
        }
        {
            Parameter a(random_tensor(rng, n, m)), b(random_tensor(rng, 1, m));
            Tensor cot = random_tensor(rng, n, m);
            run({&a, &b}, [&](Tape& t) {
                return t.sum_all(t.mul(t.add_rowvec(t.param(a), t.param(b)), t.constant(cot)));
            });
        }
        {
            Parameter a(random_tensor(rng, n, m)), b(random_tensor(rng, n, m));
            Tensor cot = random_tensor(rng, n, m);
            run({&a, &b}, [&](Tape& t) {
                return t.sum_all(t.mul(t.mul(t.param(a), t.param(b)), t.constant(cot)));
            });
        }
        {
            Parameter a(random_tensor(rng, n, m, -2.0, 2.0));
            Tensor cot = random_tensor(rng, n, m);
            run({&a}, [&](Tape& t) { return t.sum_all(t.mul(t.sigmoid(t.param(a)), t.constant(cot))); });
            run({&a}, [&](Tape& t) { return t.sum_all(t.mul(t.tanh(t.param(a)), t.constant(cot))); });
        }
        {
            Parameter a(random_tensor_away_from_zero(rng, n, m));
            Tensor cot = random_tensor(rng, n, m);
            run({&a}, [&](Tape& t) { return t.sum_all(t.mul(t.relu(t.param(a)), t.constant(cot))); });
        }
        {
            Parameter a(random_tensor(rng, n, m, 0.3, 3.0));
            Tensor cot = random_tensor(rng, n, m);
            run({&a}, [&](Tape& t) { return t.sum_all(t.mul(t.rsqrt(t.param(a)), t.constant(cot))); });
        }
        {
            Parameter a(random_tensor(rng, n, k)), b(random_tensor(rng, n, m));
            Tensor cot = random_tensor(rng, n, k + m);
            run({&a, &b}, [&](Tape& t) {
                return t.sum_all(t.mul(t.concat_cols(t.param(a), t.param(b)), t.constant(cot)));
            });
        }
        {
            Parameter a(random_tensor(rng, 4, 5));
            Tensor cot = random_tensor(rng, 2, 3);
            run({&a}, [&](Tape& t) {
                return t.sum_all(t.mul(t.slice(t.param(a), 1, 3, 1, 4), t.constant(cot)));
            });
        }
        {
            Parameter a(random_tensor(rng, 4, m));
            auto idx = std::make_shared<const std::vector<int>>(std::vector<int>{2, 0, 2, 3});
            Tensor cot = random_tensor(rng, 4, m);
            run({&a}, [&](Tape& t) {
                return t.sum_all(t.mul(t.gather_rows(t.param(a), idx), t.constant(cot)));
            });
        }
        {
            // constant CSR times dense parameter
            auto csr = std::make_shared<const CsrMatrix>(
                CsrMatrix::from_coo(3, 4, {0, 0, 1, 2, 2}, {0, 3, 1, 0, 2}, {0.5, -1.0, 2.0, 1.5, 0.25}));
            Parameter b(random_tensor(rng, 4, m));
            Tensor cot = random_tensor(rng, 3, m);
            run({&b}, [&](Tape& t) {
                return t.sum_all(t.mul(t.spmm(csr, t.param(b)), t.constant(cot)));
            });
        }
        {
            // COO sparse with variable values times dense parameter
            auto rows = std::make_shared<const std::vector<int>>(std::vector<int>{0, 0, 1, 2, 2});
            auto cols = std::make_shared<const std::vector<int>>(std::vector<int>{0, 2, 1, 0, 2});
            Parameter vals(random_tensor(rng, 5, 1));
            Parameter dense(random_tensor(rng, 3, m));
            Tensor cot = random_tensor(rng, 3, m);
            run({&vals, &dense}, [&](Tape& t) {
                return t.sum_all(t.mul(t.spmm_coo(rows, cols, 3, t.param(vals), t.param(dense)), t.constant(cot)));
            });
        }
        {
            // dropout with a deterministic mask: fixed rng seed per build
            Parameter a(random_tensor(rng, n, m));
            Tensor cot = random_tensor(rng, n, m);
            const std::uint64_t mask_seed = rng.next_u64();
            run({&a}, [&](Tape& t) {
                Rng mask_rng(mask_seed);
                return t.sum_all(t.mul(t.dropout(t.param(a), 0.5, mask_rng), t.constant(cot)));
            });
        }
        {
            const int classes = 3;
            Parameter logits(random_tensor(rng, 4, classes, -2.0, 2.0));
            auto labels = std::make_shared<const std::vector<int>>(std::vector<int>{0, 2, 1, 2});
            auto mask = std::make_shared<const std::vector<int>>(std::vector<int>{0, 2, 3});
            run({&logits}, [&](Tape& t) { return t.softmax_cross_entropy(t.param(logits), labels, mask); });
        }
    }
    MESSAGE("primitive FD checks: ", checked, " entries, worst rel err ", worst);
    CHECK(checked > 100);
}

TEST_CASE("softmax cross entropy properties") {
    auto labels = std::make_shared<const std::vector<int>>(std::vector<int>{1, 0});
    auto all_rows = std::make_shared<const std::vector<int>>(std::vector<int>{0, 1});

    SUBCASE("row-constant shifts leave the loss unchanged") {
        Rng rng(5);
        Tensor logits = random_tensor(rng, 2, 3);
        Tape t1;
        const double base = t1.value(t1.softmax_cross_entropy(t1.constant(logits), labels, all_rows)).item();
        Tensor shifted = logits;
        for (int j = 0; j < 3; ++j) {
            shifted.at(0, j) += 123.25;
            shifted.at(1, j) -= 7.5;
        }
        Tape t2;
        const double moved = t2.value(t2.softmax_cross_entropy(t2.constant(shifted), labels, all_rows)).item();
        CHECK(std::abs(base - moved) < 1e-12);
    }
    SUBCASE("dominant correct logit drives the loss to zero") {
        Tensor logits(1, 3);
        logits.at(0, 1) = 60.0;
        auto single_label = std::make_shared<const std::vector<int>>(std::vector<int>{1});
        auto one = std::make_shared<const std::vector<int>>(std::vector<int>{0});
        Tape t;
        CHECK(t.value(t.softmax_cross_entropy(t.constant(logits), single_label, one)).item() < 1e-15);
    }
    SUBCASE("only masked rows count") {
        Tensor logits(2, 2);
        logits.at(0, 0) = 3.0;   // row 0 label 1 -> wrong
        logits.at(1, 0) = 10.0;  // row 1 label 0 -> perfect (masked)
        auto only0 = std::make_shared<const std::vector<int>>(std::vector<int>{0});
        Tape t;
        const double l = t.value(t.softmax_cross_entropy(t.constant(logits), labels, only0)).item();
        // -log sigmoid(-3) for the two-class row
        CHECK(l == doctest::Approx(std::log(1.0 + std::exp(3.0))).epsilon(1e-12));
    }
    SUBCASE("empty mask rejected") {
        Tape t;
        auto none = std::make_shared<const std::vector<int>>(std::vector<int>{});
        CHECK_THROWS_AS(t.softmax_cross_entropy(t.constant(Tensor(2, 2)), labels, none), ValidationError);
    }
}

TEST_CASE("dropout semantics") {
    Rng rng(17);
    Tensor x = random_tensor(rng, 8, 8, 0.5, 1.0);
    SUBCASE("p=0 is the identity (same node, no mask)") {
        Tape t;
        Rng d(1);
        Var xv = t.constant(x);
        Var y = t.dropout(xv, 0.0, d);
        CHECK(y.id == xv.id);
    }
    SUBCASE("survivors scale by 1/(1-p)") {
        Tape t;
        Rng d(2);
        const double p = 0.25;
        Var y = t.dropout(t.constant(x), p, d);
        int kept = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double out = t.value(y).raw()[i];
            if (out != 0.0) {
                CHECK(out == doctest::Approx(x.raw()[i] / (1.0 - p)).epsilon(1e-12));
                ++kept;
            }
        }
        CHECK(kept > 0);
        CHECK(kept < static_cast<int>(x.size()));
    }
    SUBCASE("p outside [0,1) rejected") {
        Tape t;
        Rng d(3);
        CHECK_THROWS_AS(t.dropout(t.constant(x), 1.0, d), ValidationError);
        CHECK_THROWS_AS(t.dropout(t.constant(x), -0.1, d), ValidationError);
    }
}

TEST_CASE("adam") {
    SUBCASE("zero gradient and zero decay is a no-op") {
        Parameter p(Tensor::full(2, 2, 1.5));
        zero_grads({&p});
        adam_step({&p}, AdamConfig{0.1, 0.9, 0.999, 1e-8, 0.0});
        for (double x : p.value.raw()) CHECK(x == 1.5);
    }
    SUBCASE("unit gradient first step moves by ~lr") {
        Parameter p(Tensor::scalar(0.0));
        p.grad.fill(1.0);
        adam_step({&p}, AdamConfig{0.1, 0.9, 0.999, 1e-8, 0.0});
        // bias-corrected mhat = 1, vhat = 1 -> step = lr / (1 + eps)
        CHECK(p.value.item() == doctest::Approx(-0.1).epsilon(1e-6));
    }
    SUBCASE("decoupled decay shrinks by (1 - lr*wd)") {
        Parameter p(Tensor::scalar(2.0));
        zero_grads({&p});
        adam_step({&p}, AdamConfig{0.1, 0.9, 0.999, 1e-8, 0.05});
        CHECK(p.value.item() == doctest::Approx(2.0 * (1.0 - 0.1 * 0.05)).epsilon(1e-12));
    }
    SUBCASE("deterministic across runs") {
        auto run_once = [] {
            Rng rng(9);
            Parameter p(random_tensor(rng, 3, 3));
            for (int it = 0; it < 5; ++it) {
                zero_grads({&p});
                Tape t;
                Var v = t.param(p);
                t.backward(t.sum_all(t.mul(v, v)));
                adam_step({&p}, AdamConfig{});
            }
            return p.value;
        };
        CHECK(run_once().raw() == run_once().raw());
    }
}
