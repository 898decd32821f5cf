#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mesbm/data_model.hpp"
#include "mesbm/quadrature.hpp"

namespace mesbm {

// Block-restricted quadrature log-likelihood used by the BIC criterion,
// evaluated with the unadapted rule centered at zero:
//   sum_i log sum_b (u_b / sqrt(pi)) *
//       exp( n_i * z_ib - N * softplus(z_ib) ),   z_ib = theta_{tau_i} + sqrt(2) sigma_{tau_i} a_b
// block_counts[i] is subject i's edge count in the block; block_total its
// dyad count. Zero subjects yield 0.
double block_loglik(const Eigen::VectorXd& theta_block, const SigmaVector& sigma,
                    const Eigen::VectorXd& block_counts, double block_total,
                    const std::vector<int>& tau, const QuadratureRule& rule);

// -2 * block_loglik + log(N) * (number of constant runs of theta_block).
double bic(const Eigen::VectorXd& theta_block, const SigmaVector& sigma,
           const Eigen::VectorXd& block_counts, double block_total,
           const std::vector<int>& tau, const QuadratureRule& rule);

struct BlockTuning {
    int b_star = 1;             // BIC minimizer; ties pick the smallest level
    Eigen::VectorXd bic_trace;  // entry b - 1 holds the BIC at fusion level b
    Eigen::VectorXd fused;      // fused vector at b_star
    int df = 1;
};

// Scans fusion levels b = 1..S over the shape-projected vector, holding
// sigma at its step-1 estimate.
BlockTuning tune_fusion(const Eigen::VectorXd& theta_check, const SigmaVector& sigma,
                        const Eigen::VectorXd& block_counts, double block_total,
                        const std::vector<int>& tau, const QuadratureRule& rule);

}  // namespace mesbm
