#pragma once

// Central finite-difference oracle for tape gradients. `build` must construct
// the same forward pass from scratch on a fresh tape each call (re-reading
// parameter values), so perturbed evaluations see the perturbation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gegcn/tape.hpp"

namespace gegcn::test {

struct GradCheckResult {
    double max_rel_err = 0.0;
    long checked = 0;
};

// Relative error with an absolute floor: |a - fd| / max(|a|, |fd|, floor).
// The floor absorbs finite-difference roundoff (~1e-10 at h=1e-5..1e-6) on
// entries whose true gradient is ~0.
inline GradCheckResult check_gradients(const std::vector<gegcn::Parameter*>& params,
                                       const std::function<gegcn::Var(gegcn::Tape&)>& build, double h = 1e-6,
                                       double floor = 1e-4) {
    using namespace gegcn;
    zero_grads(params);
    Tape tape;
    Var loss = build(tape);
    tape.backward(loss);
    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (auto* p : params) analytic.push_back(p->grad);

    auto eval = [&]() {
        Tape t;
        return t.value(build(t)).item();
    };

    GradCheckResult res;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter& p = *params[pi];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double orig = p.value.raw()[i];
            p.value.raw()[i] = orig + h;
            const double fp = eval();
            p.value.raw()[i] = orig - h;
            const double fm = eval();
            p.value.raw()[i] = orig;
            const double fd = (fp - fm) / (2.0 * h);
            const double a = analytic[pi].raw()[i];
            const double scale = std::max({std::abs(a), std::abs(fd), floor});
            res.max_rel_err = std::max(res.max_rel_err, std::abs(a - fd) / scale);
            ++res.checked;
        }
    }
    return res;
}

}  // namespace gegcn::test
