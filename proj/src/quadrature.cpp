#include "mesbm/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <utility>

namespace mesbm {

namespace {

// Orthonormal Hermite values (weight e^{-x^2}) at x: returns {p_B, p_{B-1}}.
// The three-term recurrence stays within double range for every B <= 64
// because |p_k(x)| <= O(e^{x^2 / 2}) and |x| < 11 on that range.
std::pair<double, double> orthonormal_hermite(int B, double x) {
    double prev = 0.0;
    double cur = 1.0 / std::pow(std::numbers::pi, 0.25);
    for (int k = 0; k < B; ++k) {
        const double next =
            x * std::sqrt(2.0 / (k + 1)) * cur - std::sqrt(k / (k + 1.0)) * prev;
        prev = cur;
        cur = next;
    }
    return {cur, prev};
}

}  // namespace

QuadratureRule hermite_rule(int B) {
    if (B < 1 || B > 64) {
        throw DataError("quadrature order " + std::to_string(B) + " outside 1..64");
    }

    QuadratureRule rule;
    rule.nodes.resize(B);
    rule.weights.resize(B);

    if (B == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = std::sqrt(std::numbers::pi);
    } else {
        // Jacobi matrix of the Hermite recurrence: zero diagonal,
        // off-diagonal sqrt(i / 2). Eigenvalues seed the node search.
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(B);
        Eigen::VectorXd sub(B - 1);
        for (int i = 1; i < B; ++i) sub[i - 1] = std::sqrt(i / 2.0);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("Hermite node eigensolve failed");
        }
        rule.nodes = solver.eigenvalues();

        // Newton polish on the orthonormal polynomial, then the Christoffel
        // weight 1 / (B p_{B-1}(x)^2). The eigensolver alone leaves the
        // extreme weights with large relative error: their squared first
        // eigenvector components sit below its absolute accuracy floor.
        const double mu0 = std::sqrt(std::numbers::pi);
        const double dscale = std::sqrt(2.0 * B);
        for (int b = 0; b < B; ++b) {
            double x = rule.nodes[b];
            for (int it = 0; it < 2; ++it) {
                const auto [pB, pBm1] = orthonormal_hermite(B, x);
                x -= pB / (dscale * pBm1);
            }
            rule.nodes[b] = x;
            const double pBm1 = orthonormal_hermite(B, x).second;
            rule.weights[b] = 1.0 / (B * pBm1 * pBm1);
        }

        // Enforce the exact +/- symmetry of the rule.
        for (int b = 0; b < B / 2; ++b) {
            const int m = B - 1 - b;
            const double node = 0.5 * (rule.nodes[m] - rule.nodes[b]);
            rule.nodes[b] = -node;
            rule.nodes[m] = node;
            const double weight = 0.5 * (rule.weights[b] + rule.weights[m]);
            rule.weights[b] = weight;
            rule.weights[m] = weight;
        }
        if (B % 2 == 1) rule.nodes[B / 2] = 0.0;
        rule.weights *= mu0 / rule.weights.sum();
    }

    rule.log_weights = rule.weights.array().log();
    return rule;
}

}  // namespace mesbm
