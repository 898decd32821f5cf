#include "mesbm/tuning.hpp"

#include <cmath>
#include <numbers>
#include <span>

#include "mesbm/fusion.hpp"
#include "mesbm/numeric.hpp"

namespace mesbm {

double block_loglik(const Eigen::VectorXd& theta_block, const SigmaVector& sigma,
                    const Eigen::VectorXd& block_counts, double block_total,
                    const std::vector<int>& tau, const QuadratureRule& rule) {
    const int B = rule.order();
    const double log_weight_norm = 0.5 * std::log(std::numbers::pi);

    Eigen::VectorXd terms(B);
    KahanSum sum;
    for (Eigen::Index i = 0; i < block_counts.size(); ++i) {
        const int s = tau[static_cast<size_t>(i)] - 1;
        for (int b = 0; b < B; ++b) {
            const double z =
                theta_block[s] + std::numbers::sqrt2 * sigma[s] * rule.nodes[b];
            terms[b] = rule.log_weights[b] - log_weight_norm + block_counts[i] * z -
                       block_total * softplus(z);
        }
        sum.add(log_sum_exp(std::span<const double>(terms.data(), static_cast<size_t>(B))));
    }
    return sum.value();
}

double bic(const Eigen::VectorXd& theta_block, const SigmaVector& sigma,
           const Eigen::VectorXd& block_counts, double block_total,
           const std::vector<int>& tau, const QuadratureRule& rule) {
    const double loglik =
        block_loglik(theta_block, sigma, block_counts, block_total, tau, rule);
    const double penalty = std::log(static_cast<double>(block_counts.size())) *
                           degrees_of_freedom(theta_block);
    return -2.0 * loglik + penalty;
}

BlockTuning tune_fusion(const Eigen::VectorXd& theta_check, const SigmaVector& sigma,
                        const Eigen::VectorXd& block_counts, double block_total,
                        const std::vector<int>& tau, const QuadratureRule& rule) {
    const int S = static_cast<int>(theta_check.size());

    BlockTuning out;
    out.bic_trace.resize(S);
    for (int b = 1; b <= S; ++b) {
        FusedVector<double> fused = fuse(theta_check, b);
        const double score =
            bic(fused.values, sigma, block_counts, block_total, tau, rule);
        out.bic_trace[b - 1] = score;
        if (b == 1 || score < out.bic_trace[out.b_star - 1]) {
            out.b_star = b;
            out.fused = std::move(fused.values);
            out.df = fused.df;
        }
    }
    return out;
}

}  // namespace mesbm
