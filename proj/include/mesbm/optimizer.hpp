#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "mesbm/data_model.hpp"
#include "mesbm/likelihood.hpp"
#include "mesbm/quadrature.hpp"

namespace mesbm {

struct FitConfig {
    int S = 10;
    PartitionMode partition = PartitionMode::EqualLength;
    int quad_points = 5;
    int max_outer_iters = 200;
    double objective_rel_tol = 1e-6;  // on |L_q - L_{q-1}| / (|L_{q-1}| + 1)
    double inner_tol = 1e-8;          // 1-D Newton step tolerance
};

struct UnconstrainedFit {
    ThetaMatrix theta;
    SigmaVector sigma;
    // Negative log-likelihood after each sweep, under that sweep's frozen
    // adaptations; non-increasing.
    std::vector<double> objective_trace;
    bool converged = false;
    int iterations = 0;
    long quad_fallbacks = 0;        // subject adaptations that fell back
    long line_search_failures = 0;  // 1-D updates that kept the old value
};

// Empirical-logit starting point with a 0.5 / 1 continuity correction;
// sigma starts at 0.1. Rejects empty intervals, advising a smaller S or
// equal-count partitioning.
std::pair<ThetaMatrix, SigmaVector> initialize(const BlockSufficientStats& stats,
                                               const std::vector<int>& tau, int S);

// One safeguarded-Newton update of sigma_s (optimized on the log scale and
// clamped to [kSigmaMin, kSigmaMax]) over the subjects of interval s, with
// per-subject adaptations frozen. Returns the new value; inputs are not
// mutated. s is 1-based.
double update_sigma_block(int s, const ThetaMatrix& theta, const SigmaVector& sigma,
                          const BlockSufficientStats& stats, const std::vector<int>& tau,
                          const std::vector<FrozenSubject>& frozen, double inner_tol,
                          long* line_search_failures = nullptr);

// Coordinate-wise safeguarded-Newton pass over row s of theta in the fixed
// pair-column order, using the already-updated sigma_s. Returns the new row.
Eigen::RowVectorXd update_theta_row(int s, const ThetaMatrix& theta, const SigmaVector& sigma,
                                    const BlockSufficientStats& stats,
                                    const std::vector<int>& tau,
                                    const std::vector<FrozenSubject>& frozen, double inner_tol,
                                    long* line_search_failures = nullptr);

// Block coordinate descent: per sweep, re-adapt each subject's quadrature
// (keeping the previous adaptation when it scores the current parameters
// higher, so the trace cannot rise), update every sigma_s, then every theta
// row, until the relative objective change drops below tolerance.
UnconstrainedFit fit_unconstrained(const BlockSufficientStats& stats,
                                   const std::vector<int>& tau, const QuadratureRule& rule,
                                   const FitConfig& config);

}  // namespace mesbm
