#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "mesbm/errors.hpp"
#include "mesbm/numeric.hpp"

namespace mesbm {

// Value of a smooth scalar function together with its first two derivatives.
struct Smooth1D {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

// Gauss-Hermite rule in the physicists' convention: integrates g(a)e^{-a^2}
// exactly for polynomials g of degree <= 2B - 1, and sum(weights) = sqrt(pi).
struct QuadratureRule {
    Eigen::VectorXd nodes;        // symmetric about 0, increasing
    Eigen::VectorXd weights;      // positive
    Eigen::VectorXd log_weights;  // log(weights), cached for log-space sums

    int order() const { return static_cast<int>(nodes.size()); }
};

// Builds the order-B rule from the symmetric tridiagonal Jacobi matrix of the
// Hermite recurrence; nodes and weights are symmetrized exactly. 1 <= B <= 64.
QuadratureRule hermite_rule(int B);

// Mode/curvature recentering of the base rule: transformed nodes are
// center + sqrt(2) * scale * a_b.
struct AdaptedRule {
    double center = 0.0;  // mode of the log-integrand
    double scale = 1.0;   // (-h''(center))^{-1/2}
    bool fallback = false;  // mode search failed; centered at 0 with the caller's scale
};

// Locates the mode of a strictly concave log-integrand by safeguarded Newton
// (|h'| < 1e-10 * (1 + |h''|), at most 100 iterations). On failure returns
// the fallback rule centered at 0 with scale fallback_scale and fallback = true.
template <class F>
AdaptedRule adapt(const F& log_integrand, double fallback_scale) {
    constexpr double kGradTol = 1e-10;
    constexpr int kMaxIters = 100;

    AdaptedRule out;
    double w = 0.0;
    Smooth1D h = log_integrand(w);
    bool converged = false;
    for (int it = 0; it < kMaxIters; ++it) {
        // |d2| proxies the magnitude of the terms summed into d1, whose
        // rounding noise keeps a bare absolute tolerance out of reach.
        if (std::abs(h.d1) < kGradTol * (1.0 + std::abs(h.d2))) {
            converged = true;
            break;
        }
        double step;
        if (h.d2 < 0.0) {
            step = -h.d1 / h.d2;
            // Inside the quadratic basin the objective moves by less than
            // one ulp, so value-based backtracking cannot see the
            // improvement; take the bare Newton step.
            if (std::abs(step) <= 1e-7 * (1.0 + std::abs(w))) {
                const double next = w + step;
                if (next == w) {
                    converged = true;
                    break;
                }
                w = next;
                h = log_integrand(w);
                continue;
            }
        } else {
            step = (h.d1 > 0.0 ? 1.0 : -1.0);
        }
        // Backtrack until the log-integrand does not decrease.
        Smooth1D trial = log_integrand(w + step);
        int halvings = 0;
        while ((!std::isfinite(trial.value) || trial.value < h.value) && halvings < 60) {
            step *= 0.5;
            trial = log_integrand(w + step);
            ++halvings;
        }
        if (halvings == 60) break;
        w += step;
        h = trial;
    }
    if (converged && h.d2 < 0.0) {
        out.center = w;
        out.scale = 1.0 / std::sqrt(-h.d2);
    } else {
        out.center = 0.0;
        out.scale = fallback_scale;
        out.fallback = true;
    }
    return out;
}

// log of integral exp(h(w)) dw under the adapted change of variables
// w = center + sqrt(2) * scale * a:
//   log(sqrt(2) * scale) + logsumexp_b[ log(u_b) + a_b^2 + h(w_b) ].
// Rejects non-finite integrand values at a node.
template <class F>
double integrate_log(const QuadratureRule& rule, const AdaptedRule& adapted, const F& h) {
    const int B = rule.order();
    Eigen::VectorXd terms(B);
    for (int b = 0; b < B; ++b) {
        const double a = rule.nodes[b];
        const double w = adapted.center + std::numbers::sqrt2 * adapted.scale * a;
        const double hv = h(w);
        if (!std::isfinite(hv)) {
            throw NumericalError("log-integrand is not finite at quadrature node " +
                                 std::to_string(w));
        }
        terms[b] = rule.log_weights[b] + a * a + hv;
    }
    return std::log(std::numbers::sqrt2 * adapted.scale) +
           log_sum_exp(std::span<const double>(terms.data(), static_cast<size_t>(B)));
}

}  // namespace mesbm
