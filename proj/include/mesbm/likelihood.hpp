#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mesbm/data_model.hpp"
#include "mesbm/quadrature.hpp"

namespace mesbm {

// Log-integrand of one subject's marginal likelihood:
//   h(w) = sum_p [ n_p (theta_p + w) - N_p softplus(theta_p + w) ]
//        + log phi(w; sigma^2)
// Strictly concave in w, hence a valid adaptation target.
class MarginalIntegrand {
  public:
    MarginalIntegrand(Eigen::VectorXd counts, Eigen::VectorXd totals,
                      Eigen::VectorXd theta_row, double sigma)
        : counts_(std::move(counts)),
          totals_(std::move(totals)),
          theta_row_(std::move(theta_row)),
          sigma_(sigma) {}

    Smooth1D operator()(double w) const;
    double value(double w) const;

  private:
    Eigen::VectorXd counts_;
    Eigen::VectorXd totals_;
    Eigen::VectorXd theta_row_;
    double sigma_;
};

// Inputs of one subject's marginal likelihood. The rule is borrowed, not
// owned.
struct BlockLikelihoodContext {
    Eigen::VectorXd counts;     // n_ikl per pair column
    Eigen::VectorXd totals;     // n_kl per pair column
    Eigen::VectorXd theta_row;  // theta values of the subject's interval
    double sigma = 0.1;
    const QuadratureRule* rule = nullptr;
};

// log f-tilde_i with a fresh adaptation. Sets *used_fallback when the mode
// search fell back to the unadapted rule.
double subject_loglik(const BlockLikelihoodContext& ctx, bool* used_fallback = nullptr);

// Minus the compensated sum of subject_loglik over all subjects.
double total_negloglik(const ThetaMatrix& theta, const SigmaVector& sigma,
                       const BlockSufficientStats& stats, const std::vector<int>& tau,
                       const QuadratureRule& rule, long* fallback_count = nullptr);

// One subject's quadrature state with the adapted transform frozen:
// w[b] = center + sqrt(2) * scale * a_b, base[b] = log(u_b) + a_b^2, and
// log_scale = log(sqrt(2) * scale).
struct FrozenSubject {
    Eigen::VectorXd w;
    Eigen::VectorXd base;
    double log_scale = 0.0;
    bool fallback = false;
};

FrozenSubject freeze(const QuadratureRule& rule, const AdaptedRule& adapted);

// log f-tilde at arbitrary parameters under the frozen transform.
double frozen_loglik(const FrozenSubject& f, const Eigen::VectorXd& counts,
                     const Eigen::VectorXd& totals, const Eigen::VectorXd& theta_row,
                     double sigma);

// Node-wise terms base[b] + log-integrand contributions of every pair except
// column p, including the Gaussian factor. Completing these with column p's
// contribution reproduces the frozen log-likelihood.
Eigen::VectorXd rest_without_pair(const FrozenSubject& f, const Eigen::VectorXd& counts,
                                  const Eigen::VectorXd& totals,
                                  const Eigen::VectorXd& theta_row, double sigma, int p);

// Node-wise terms base[b] + contributions of all pairs, without the Gaussian
// factor.
Eigen::VectorXd rest_without_sigma(const FrozenSubject& f, const Eigen::VectorXd& counts,
                                   const Eigen::VectorXd& totals,
                                   const Eigen::VectorXd& theta_row);

// log f-tilde and its derivatives in theta_p with everything else frozen
// in rest. Derivatives are of the log-likelihood; a minimizer negates them.
Smooth1D theta_partial(const FrozenSubject& f, const Eigen::VectorXd& rest, double count,
                       double total, double theta_p);

// log f-tilde and its derivatives in sigma with the pair terms frozen in
// rest.
Smooth1D sigma_partial(const FrozenSubject& f, const Eigen::VectorXd& rest, double sigma);

// Per-subject derivative of log f-tilde in theta of pair column p under the
// frozen transform; block gradients are sums of these over an interval's
// subjects.
double block_gradient_theta(const FrozenSubject& f, const BlockLikelihoodContext& ctx, int p);

// Per-subject derivative of log f-tilde in sigma under the frozen transform.
double block_gradient_sigma(const FrozenSubject& f, const BlockLikelihoodContext& ctx);

}  // namespace mesbm
