#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mesbm/fusion.hpp>
#include <mesbm/numeric.hpp>
#include <mesbm/quadrature.hpp>
#include <mesbm/tuning.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

// Straightforward per-subject transcription of the screening log-likelihood.
double direct_block_loglik(const Eigen::VectorXd& theta, const Eigen::VectorXd& sigma,
                           const Eigen::VectorXd& counts, double total,
                           const std::vector<int>& tau, const mesbm::QuadratureRule& rule) {
    double out = 0.0;
    for (Eigen::Index i = 0; i < counts.size(); ++i) {
        const int s = tau[static_cast<size_t>(i)] - 1;
        double lik = 0.0;
        for (int b = 0; b < rule.order(); ++b) {
            const double z = theta[s] + std::numbers::sqrt2 * sigma[s] * rule.nodes[b];
            lik += rule.weights[b] / std::sqrt(std::numbers::pi) *
                   std::exp(counts[i] * z - total * mesbm::softplus(z));
        }
        out += std::log(lik);
    }
    return out;
}

struct BlockCase {
    Eigen::VectorXd theta;
    Eigen::VectorXd sigma;
    Eigen::VectorXd counts;
    double total = 0.0;
    std::vector<int> tau;
};

// counts[i] = round(total * logistic(theta[tau_i])), per_interval subjects each.
BlockCase synthetic_case(const Eigen::VectorXd& theta, double sigma_level, double total,
                         int per_interval) {
    BlockCase c;
    c.theta = theta;
    c.sigma = Eigen::VectorXd::Constant(theta.size(), sigma_level);
    c.total = total;
    const Eigen::Index S = theta.size();
    c.counts.resize(S * per_interval);
    for (Eigen::Index s = 0; s < S; ++s) {
        for (int r = 0; r < per_interval; ++r) {
            c.counts[s * per_interval + r] = std::round(total * mesbm::logistic(theta[s]));
            c.tau.push_back(static_cast<int>(s) + 1);
        }
    }
    return c;
}

}  // namespace

using namespace mesbm;

TEST_CASE("block_loglik matches a direct transcription of its formula") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> theta_dist(-2.0, 2.0);
    std::uniform_real_distribution<double> sigma_dist(0.05, 1.0);
    const QuadratureRule rule = hermite_rule(5);
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::Index S = 2 + static_cast<Eigen::Index>(rng() % 5);
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 12);
        Eigen::VectorXd theta(S), sigma(S), counts(n);
        for (Eigen::Index s = 0; s < S; ++s) {
            theta[s] = theta_dist(rng);
            sigma[s] = sigma_dist(rng);
        }
        const double total = static_cast<double>(5 + rng() % 46);
        std::vector<int> tau;
        for (Eigen::Index i = 0; i < n; ++i) {
            counts[i] = static_cast<double>(rng() % (static_cast<std::uint64_t>(total) + 1));
            tau.push_back(1 + static_cast<int>(rng() % static_cast<std::uint64_t>(S)));
        }
        const double got = block_loglik(theta, sigma, counts, total, tau, rule);
        const double want = direct_block_loglik(theta, sigma, counts, total, tau, rule);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("block_loglik of zero subjects is exactly zero") {
    const QuadratureRule rule = hermite_rule(5);
    const Eigen::VectorXd theta = vec({0.5, -0.5});
    const Eigen::VectorXd sigma = vec({0.2, 0.2});
    CHECK(block_loglik(theta, sigma, Eigen::VectorXd(), 10.0, {}, rule) == 0.0);
}

TEST_CASE("tiny sigma collapses block_loglik to the plug-in binomial kernel") {
    const QuadratureRule rule = hermite_rule(5);
    const Eigen::VectorXd theta = vec({-0.4, 0.7});
    const Eigen::VectorXd sigma = vec({1e-8, 1e-8});
    const Eigen::VectorXd counts = vec({12, 30, 44});
    const std::vector<int> tau = {1, 2, 2};
    const double total = 50.0;
    double want = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double z = theta[tau[static_cast<size_t>(i)] - 1];
        want += counts[i] * z - total * softplus(z);
    }
    const double got = block_loglik(theta, sigma, counts, total, tau, rule);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("block_loglik converges to the exact marginal for a single subject") {
    // One subject, one interval: the screening likelihood is the marginal
    // integral of a single-block subject, so a dense Simpson rule over the
    // same integrand is an independent reference.
    const double theta = -0.5;
    const double sigma = 0.3;
    const double total = 10.0;
    const double count = 3.0;
    const auto h = [&](double w) {
        const double z = theta + w;
        return count * z - total * softplus(z) - 0.5 * w * w / (sigma * sigma) -
               std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
    };
    const double exact = oracles::log_integral_oracle(h, sigma, 5.0);
    const Eigen::VectorXd tv = vec({theta});
    const Eigen::VectorXd sv = vec({sigma});
    const Eigen::VectorXd counts = vec({count});
    const std::vector<int> tau = {1};
    const double b40 = block_loglik(tv, sv, counts, total, tau, hermite_rule(40));
    CHECK(std::abs(std::expm1(b40 - exact)) < 1e-8);
    const double b5 = block_loglik(tv, sv, counts, total, tau, hermite_rule(5));
    CHECK(std::abs(std::expm1(b5 - exact)) < 1e-4);
}

TEST_CASE("bic penalty is log(num_subjects) per constant run") {
    const QuadratureRule rule = hermite_rule(5);
    // Subjects sit only in intervals 1 and 4, where both candidates agree, so
    // the likelihood terms cancel and the BIC gap is purely the penalty.
    const Eigen::VectorXd flat = vec({0.3, 0.3, 0.3, 0.3});
    const Eigen::VectorXd wiggly = vec({0.3, 0.1, 0.2, 0.3});
    const Eigen::VectorXd sigma = Eigen::VectorXd::Constant(4, 0.2);
    const Eigen::VectorXd counts = vec({10, 20, 30, 40, 50, 25});
    const std::vector<int> tau = {1, 4, 1, 4, 1, 4};
    const double total = 60.0;
    const double gap = bic(wiggly, sigma, counts, total, tau, rule) -
                       bic(flat, sigma, counts, total, tau, rule);
    CHECK(gap == doctest::Approx(3.0 * std::log(6.0)).epsilon(1e-12));

    const double loglik = block_loglik(flat, sigma, counts, total, tau, rule);
    const double score = bic(flat, sigma, counts, total, tau, rule);
    CHECK(score + 2.0 * loglik == doctest::Approx(std::log(6.0)).epsilon(1e-9));
}

TEST_CASE("tune_fusion keeps one piece for a constant vector") {
    const QuadratureRule rule = hermite_rule(5);
    BlockCase c = synthetic_case(Eigen::VectorXd::Constant(6, 0.4), 0.1, 80.0, 5);
    BlockTuning tuned = tune_fusion(c.theta, c.sigma, c.counts, c.total, c.tau, rule);
    CHECK(tuned.b_star == 1);
    CHECK(tuned.df == 1);
    CHECK((tuned.fused.array() == 0.4).all());
    CHECK(tuned.bic_trace.size() == 6);
    // Every fusion of a constant vector scores identically.
    CHECK((tuned.bic_trace.array() == tuned.bic_trace[0]).all());
}

TEST_CASE("tune_fusion recovers a strong two-level split") {
    const QuadratureRule rule = hermite_rule(5);
    const Eigen::VectorXd theta =
        vec({-1.02, -0.98, -1.01, -0.99, -1.0, 0.49, 0.51, 0.5, 0.48, 0.52});
    BlockCase c;
    c.theta = theta;
    c.sigma = Eigen::VectorXd::Constant(10, 0.1);
    c.total = 100.0;
    c.counts.resize(40);
    for (int i = 0; i < 40; ++i) {
        const int s = i / 4;
        c.counts[i] = std::round(100.0 * mesbm::logistic(s < 5 ? -1.0 : 0.5));
        c.tau.push_back(s + 1);
    }
    BlockTuning tuned = tune_fusion(c.theta, c.sigma, c.counts, c.total, c.tau, rule);
    CHECK(tuned.b_star == 2);
    CHECK(tuned.df == 2);
    FusedVector<double> expected = fuse(theta, 2);
    CHECK((tuned.fused.array() == expected.values.array()).all());

    // The reported trace must be the BIC of each fusion level, with b_star
    // its strict argmin scanned from below.
    int arg = 1;
    for (int b = 1; b <= 10; ++b) {
        const double score =
            bic(fuse(theta, b).values, c.sigma, c.counts, c.total, c.tau, rule);
        CHECK(tuned.bic_trace[b - 1] == doctest::Approx(score).epsilon(1e-13));
        if (score < tuned.bic_trace[arg - 1]) arg = b;
    }
    CHECK(arg == tuned.b_star);
}

TEST_CASE("tune_fusion lands on the worked two-piece curve") {
    const QuadratureRule rule = hermite_rule(5);
    BlockCase c = synthetic_case(vec({0.1, 0.2, 0.3, 0.5, 0.6}), 0.1, 100.0, 8);
    BlockTuning tuned = tune_fusion(c.theta, c.sigma, c.counts, c.total, c.tau, rule);
    CHECK(tuned.b_star == 2);
    CHECK((tuned.fused.array() == vec({0.2, 0.2, 0.2, 0.55, 0.55}).array()).all());
    CHECK(tuned.df == 2);
}
