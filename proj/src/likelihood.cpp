#include "mesbm/likelihood.hpp"

#include <cmath>
#include <span>

namespace mesbm {

namespace {

std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<size_t>(v.size())};
}

// Softmax of terms, written into pi; returns logsumexp(terms).
double softmax_into(const Eigen::VectorXd& terms, Eigen::VectorXd& pi) {
    const double lse = log_sum_exp(as_span(terms));
    pi = (terms.array() - lse).exp();
    return lse;
}

}  // namespace

Smooth1D MarginalIntegrand::operator()(double w) const {
    Smooth1D out;
    for (Eigen::Index p = 0; p < counts_.size(); ++p) {
        const double z = theta_row_[p] + w;
        const double q = logistic(z);
        out.value += counts_[p] * z - totals_[p] * softplus(z);
        out.d1 += counts_[p] - totals_[p] * q;
        out.d2 -= totals_[p] * q * (1.0 - q);
    }
    out.value += log_normal_pdf(w, sigma_);
    out.d1 -= w / (sigma_ * sigma_);
    out.d2 -= 1.0 / (sigma_ * sigma_);
    return out;
}

double MarginalIntegrand::value(double w) const {
    double v = 0.0;
    for (Eigen::Index p = 0; p < counts_.size(); ++p) {
        const double z = theta_row_[p] + w;
        v += counts_[p] * z - totals_[p] * softplus(z);
    }
    return v + log_normal_pdf(w, sigma_);
}

double subject_loglik(const BlockLikelihoodContext& ctx, bool* used_fallback) {
    const MarginalIntegrand h(ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma);
    const AdaptedRule adapted = adapt(h, ctx.sigma);
    if (used_fallback != nullptr) *used_fallback = adapted.fallback;
    return integrate_log(*ctx.rule, adapted, [&](double w) { return h.value(w); });
}

double total_negloglik(const ThetaMatrix& theta, const SigmaVector& sigma,
                       const BlockSufficientStats& stats, const std::vector<int>& tau,
                       const QuadratureRule& rule, long* fallback_count) {
    KahanSum sum;
    for (int i = 0; i < stats.num_subjects(); ++i) {
        const int s = tau[static_cast<size_t>(i)] - 1;
        BlockLikelihoodContext ctx;
        ctx.counts = stats.edge_counts.row(i).transpose();
        ctx.totals = stats.dyad_totals;
        ctx.theta_row = theta.row(s).transpose();
        ctx.sigma = sigma[s];
        ctx.rule = &rule;
        bool fell_back = false;
        sum.add(subject_loglik(ctx, &fell_back));
        if (fell_back && fallback_count != nullptr) ++*fallback_count;
    }
    return -sum.value();
}

FrozenSubject freeze(const QuadratureRule& rule, const AdaptedRule& adapted) {
    FrozenSubject f;
    const int B = rule.order();
    f.w.resize(B);
    f.base.resize(B);
    for (int b = 0; b < B; ++b) {
        const double a = rule.nodes[b];
        f.w[b] = adapted.center + std::numbers::sqrt2 * adapted.scale * a;
        f.base[b] = rule.log_weights[b] + a * a;
    }
    f.log_scale = std::log(std::numbers::sqrt2 * adapted.scale);
    f.fallback = adapted.fallback;
    return f;
}

double frozen_loglik(const FrozenSubject& f, const Eigen::VectorXd& counts,
                     const Eigen::VectorXd& totals, const Eigen::VectorXd& theta_row,
                     double sigma) {
    const MarginalIntegrand h(counts, totals, theta_row, sigma);
    Eigen::VectorXd terms(f.w.size());
    for (Eigen::Index b = 0; b < f.w.size(); ++b) {
        terms[b] = f.base[b] + h.value(f.w[b]);
    }
    return f.log_scale + log_sum_exp(as_span(terms));
}

Eigen::VectorXd rest_without_pair(const FrozenSubject& f, const Eigen::VectorXd& counts,
                                  const Eigen::VectorXd& totals,
                                  const Eigen::VectorXd& theta_row, double sigma, int p) {
    Eigen::VectorXd rest(f.w.size());
    for (Eigen::Index b = 0; b < f.w.size(); ++b) {
        double v = f.base[b] + log_normal_pdf(f.w[b], sigma);
        for (Eigen::Index q = 0; q < counts.size(); ++q) {
            if (q == p) continue;
            const double z = theta_row[q] + f.w[b];
            v += counts[q] * z - totals[q] * softplus(z);
        }
        rest[b] = v;
    }
    return rest;
}

Eigen::VectorXd rest_without_sigma(const FrozenSubject& f, const Eigen::VectorXd& counts,
                                   const Eigen::VectorXd& totals,
                                   const Eigen::VectorXd& theta_row) {
    Eigen::VectorXd rest(f.w.size());
    for (Eigen::Index b = 0; b < f.w.size(); ++b) {
        double v = f.base[b];
        for (Eigen::Index q = 0; q < counts.size(); ++q) {
            const double z = theta_row[q] + f.w[b];
            v += counts[q] * z - totals[q] * softplus(z);
        }
        rest[b] = v;
    }
    return rest;
}

Smooth1D theta_partial(const FrozenSubject& f, const Eigen::VectorXd& rest, double count,
                       double total, double theta_p) {
    const Eigen::Index B = f.w.size();
    Eigen::VectorXd terms(B), g(B), curv(B);
    for (Eigen::Index b = 0; b < B; ++b) {
        const double z = theta_p + f.w[b];
        const double q = logistic(z);
        terms[b] = rest[b] + count * z - total * softplus(z);
        g[b] = count - total * q;
        curv[b] = -total * q * (1.0 - q);
    }
    Eigen::VectorXd pi;
    const double lse = softmax_into(terms, pi);

    Smooth1D out;
    out.value = f.log_scale + lse;
    const double mean_g = pi.dot(g);
    out.d1 = mean_g;
    out.d2 = pi.dot(curv) + pi.dot(g.cwiseProduct(g)) - mean_g * mean_g;
    return out;
}

Smooth1D sigma_partial(const FrozenSubject& f, const Eigen::VectorXd& rest, double sigma) {
    const Eigen::Index B = f.w.size();
    Eigen::VectorXd terms(B), g(B), curv(B);
    const double s2 = sigma * sigma;
    for (Eigen::Index b = 0; b < B; ++b) {
        const double w2 = f.w[b] * f.w[b];
        terms[b] = rest[b] + log_normal_pdf(f.w[b], sigma);
        g[b] = w2 / (s2 * sigma) - 1.0 / sigma;
        curv[b] = -3.0 * w2 / (s2 * s2) + 1.0 / s2;
    }
    Eigen::VectorXd pi;
    const double lse = softmax_into(terms, pi);

    Smooth1D out;
    out.value = f.log_scale + lse;
    const double mean_g = pi.dot(g);
    out.d1 = mean_g;
    out.d2 = pi.dot(curv) + pi.dot(g.cwiseProduct(g)) - mean_g * mean_g;
    return out;
}

double block_gradient_theta(const FrozenSubject& f, const BlockLikelihoodContext& ctx, int p) {
    const Eigen::VectorXd rest =
        rest_without_pair(f, ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma, p);
    return theta_partial(f, rest, ctx.counts[p], ctx.totals[p], ctx.theta_row[p]).d1;
}

double block_gradient_sigma(const FrozenSubject& f, const BlockLikelihoodContext& ctx) {
    const Eigen::VectorXd rest = rest_without_sigma(f, ctx.counts, ctx.totals, ctx.theta_row);
    return sigma_partial(f, rest, ctx.sigma).d1;
}

}  // namespace mesbm
