#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mesbm/likelihood.hpp"
#include "mesbm/numeric.hpp"
#include "oracles.hpp"

using namespace mesbm;

namespace {

BlockLikelihoodContext make_context(std::vector<double> counts, std::vector<double> totals,
                                    std::vector<double> theta, double sigma,
                                    const QuadratureRule& rule) {
    BlockLikelihoodContext ctx;
    ctx.counts = Eigen::Map<const Eigen::VectorXd>(counts.data(),
                                                   static_cast<Eigen::Index>(counts.size()));
    ctx.totals = Eigen::Map<const Eigen::VectorXd>(totals.data(),
                                                   static_cast<Eigen::Index>(totals.size()));
    ctx.theta_row = Eigen::Map<const Eigen::VectorXd>(theta.data(),
                                                      static_cast<Eigen::Index>(theta.size()));
    ctx.sigma = sigma;
    ctx.rule = &rule;
    return ctx;
}

double oracle_loglik(const BlockLikelihoodContext& ctx) {
    const MarginalIntegrand h(ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma);
    const double bracket =
        ctx.sigma * ctx.sigma * ctx.totals.sum() + 10.0 * ctx.sigma + 10.0;
    return oracles::log_integral_oracle([&](double w) { return h.value(w); }, ctx.sigma,
                                        bracket);
}

BlockLikelihoodContext random_context(std::mt19937_64& rng, const QuadratureRule& rule,
                                      int pairs) {
    std::uniform_real_distribution<double> theta_dist(-4.0, 4.0);
    std::uniform_real_distribution<double> sigma_dist(0.05, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<double> counts, totals, theta;
    for (int p = 0; p < pairs; ++p) {
        const double total = std::max(1.0, std::floor(unif(rng) * 1500.0));
        totals.push_back(total);
        counts.push_back(std::floor(unif(rng) * (total + 1.0)));
        theta.push_back(theta_dist(rng));
    }
    return make_context(counts, totals, theta, sigma_dist(rng), rule);
}

}  // namespace

TEST_CASE("single fair dyad") {
    const QuadratureRule rule = hermite_rule(5);
    const auto ctx = make_context({1.0}, {1.0}, {0.0}, kSigmaMin, rule);
    CHECK(subject_loglik(ctx) == doctest::Approx(std::log(0.5)).epsilon(1e-4));
}

TEST_CASE("near-certain non-edges reduce to the softplus bound") {
    const QuadratureRule rule = hermite_rule(5);
    const auto ctx = make_context({0.0}, {100.0}, {-10.0}, kSigmaMin, rule);
    CHECK(std::abs(subject_loglik(ctx) - (-100.0 * softplus(-10.0))) < 1e-6);
}

TEST_CASE("three-block subject matches the Simpson oracle") {
    const QuadratureRule rule = hermite_rule(5);
    const auto ctx = make_context({300.0, 200.0, 80.0}, {1225.0, 1250.0, 300.0},
                                  {-1.0, -1.5, -0.5}, 0.3, rule);
    const double value = subject_loglik(ctx);
    const double oracle = oracle_loglik(ctx);
    CHECK(std::abs(std::expm1(value - oracle)) < 1e-4);
}

TEST_CASE("log-likelihoods are never positive") {
    std::mt19937_64 rng(31);
    const QuadratureRule rule = hermite_rule(5);
    for (int c = 0; c < 100; ++c) {
        const auto ctx = random_context(rng, rule, 1 + static_cast<int>(rng() % 3));
        CHECK(subject_loglik(ctx) <= 1e-6);
    }
}

TEST_CASE("pair order does not change the subject log-likelihood") {
    const QuadratureRule rule = hermite_rule(7);
    const auto ctx = make_context({300.0, 200.0, 80.0}, {1225.0, 1250.0, 300.0},
                                  {-1.0, -1.5, -0.5}, 0.3, rule);
    const auto flipped = make_context({80.0, 300.0, 200.0}, {300.0, 1225.0, 1250.0},
                                      {-0.5, -1.0, -1.5}, 0.3, rule);
    CHECK(std::abs(subject_loglik(ctx) - subject_loglik(flipped)) < 1e-12);
}

TEST_CASE("total negative log-likelihood is the subject sum") {
    const QuadratureRule rule = hermite_rule(5);

    BlockSufficientStats empty;
    empty.edge_counts.resize(0, 1);
    empty.dyad_totals = Eigen::VectorXd::Constant(1, 10.0);
    CHECK(total_negloglik(ThetaMatrix::Zero(1, 1), SigmaVector::Constant(1, 0.2), empty, {},
                          rule) == 0.0);

    BlockSufficientStats one;
    one.edge_counts.resize(1, 1);
    one.edge_counts << 4.0;
    one.dyad_totals = Eigen::VectorXd::Constant(1, 10.0);
    const ThetaMatrix theta = ThetaMatrix::Constant(1, 1, -0.3);
    const SigmaVector sigma = SigmaVector::Constant(1, 0.25);
    const auto ctx = make_context({4.0}, {10.0}, {-0.3}, 0.25, rule);
    CHECK(total_negloglik(theta, sigma, one, {1}, rule) ==
          doctest::Approx(-subject_loglik(ctx)).epsilon(1e-14));
}

TEST_CASE("summation order changes the total by less than 1e-9") {
    std::mt19937_64 rng(5);
    const QuadratureRule rule = hermite_rule(5);
    const int N = 10;

    BlockSufficientStats stats;
    stats.edge_counts.resize(N, 2);
    stats.dyad_totals = Eigen::Vector2d(300.0, 500.0);
    std::vector<int> tau;
    for (int i = 0; i < N; ++i) {
        stats.edge_counts(i, 0) = static_cast<double>(rng() % 301);
        stats.edge_counts(i, 1) = static_cast<double>(rng() % 501);
        tau.push_back(1 + static_cast<int>(rng() % 3));
    }
    ThetaMatrix theta(3, 2);
    theta << -1.0, -2.0, -0.5, -1.5, 0.2, -1.0;
    const SigmaVector sigma = SigmaVector::Constant(3, 0.3);

    const double total = total_negloglik(theta, sigma, stats, tau, rule);

    std::vector<int> order{9, 3, 0, 7, 5, 1, 8, 2, 6, 4};
    double permuted = 0.0;
    for (int i : order) {
        const int s = tau[static_cast<size_t>(i)] - 1;
        BlockLikelihoodContext ctx;
        ctx.counts = stats.edge_counts.row(i).transpose();
        ctx.totals = stats.dyad_totals;
        ctx.theta_row = theta.row(s).transpose();
        ctx.sigma = sigma[s];
        ctx.rule = &rule;
        permuted -= subject_loglik(ctx);
    }
    CHECK(std::abs(total - permuted) < 1e-9);
}

TEST_CASE("frozen evaluation reproduces the adaptive value at the freeze point") {
    std::mt19937_64 rng(17);
    const QuadratureRule rule = hermite_rule(5);
    for (int c = 0; c < 20; ++c) {
        const auto ctx = random_context(rng, rule, 2);
        const MarginalIntegrand h(ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma);
        const FrozenSubject f = freeze(rule, adapt(h, ctx.sigma));
        CHECK(frozen_loglik(f, ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma) ==
              doctest::Approx(subject_loglik(ctx)).epsilon(1e-13));
    }
}

TEST_CASE("partial objectives complete the frozen log-likelihood") {
    std::mt19937_64 rng(19);
    const QuadratureRule rule = hermite_rule(5);
    for (int c = 0; c < 20; ++c) {
        const auto ctx = random_context(rng, rule, 3);
        const MarginalIntegrand h(ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma);
        const FrozenSubject f = freeze(rule, adapt(h, ctx.sigma));
        const double full = frozen_loglik(f, ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma);

        for (int p = 0; p < 3; ++p) {
            const Eigen::VectorXd rest =
                rest_without_pair(f, ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma, p);
            const Smooth1D part =
                theta_partial(f, rest, ctx.counts[p], ctx.totals[p], ctx.theta_row[p]);
            CHECK(part.value == doctest::Approx(full).epsilon(1e-12));
        }
        const Eigen::VectorXd rest =
            rest_without_sigma(f, ctx.counts, ctx.totals, ctx.theta_row);
        CHECK(sigma_partial(f, rest, ctx.sigma).value ==
              doctest::Approx(full).epsilon(1e-12));
    }
}

TEST_CASE("analytic partial derivatives match finite differences") {
    std::mt19937_64 rng(37);
    const QuadratureRule rule = hermite_rule(5);
    const double step = 1e-5;

    for (int c = 0; c < 50; ++c) {
        const auto ctx = random_context(rng, rule, 2);
        const MarginalIntegrand h(ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma);
        const FrozenSubject f = freeze(rule, adapt(h, ctx.sigma));

        for (int p = 0; p < 2; ++p) {
            const Eigen::VectorXd rest =
                rest_without_pair(f, ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma, p);
            const auto value = [&](double t) {
                return theta_partial(f, rest, ctx.counts[p], ctx.totals[p], t).value;
            };
            const Smooth1D part =
                theta_partial(f, rest, ctx.counts[p], ctx.totals[p], ctx.theta_row[p]);
            const double fd1 = oracles::central_diff(value, ctx.theta_row[p], step);
            const double fd2 = oracles::central_diff(
                [&](double t) {
                    return theta_partial(f, rest, ctx.counts[p], ctx.totals[p], t).d1;
                },
                ctx.theta_row[p], step);
            CHECK(std::abs(part.d1 - fd1) <= 1e-5 * std::max(1.0, std::abs(fd1)));
            CHECK(std::abs(part.d2 - fd2) <= 1e-4 * std::max(1.0, std::abs(fd2)));
        }

        const Eigen::VectorXd rest =
            rest_without_sigma(f, ctx.counts, ctx.totals, ctx.theta_row);
        const auto value = [&](double s) { return sigma_partial(f, rest, s).value; };
        const Smooth1D part = sigma_partial(f, rest, ctx.sigma);
        const double fd1 = oracles::central_diff(value, ctx.sigma, step);
        const double fd2 = oracles::central_diff(
            [&](double s) { return sigma_partial(f, rest, s).d1; }, ctx.sigma, step);
        CHECK(std::abs(part.d1 - fd1) <= 1e-5 * std::max(1.0, std::abs(fd1)));
        CHECK(std::abs(part.d2 - fd2) <= 1e-4 * std::max(1.0, std::abs(fd2)));
    }
}

TEST_CASE("gradient vanishes for balanced data at theta zero") {
    const QuadratureRule rule = hermite_rule(5);
    const auto ctx = make_context({50.0}, {100.0}, {0.0}, kSigmaMin, rule);
    const MarginalIntegrand h(ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma);
    const FrozenSubject f = freeze(rule, adapt(h, ctx.sigma));
    CHECK(std::abs(block_gradient_theta(f, ctx, 0)) < 1e-6);
}

TEST_CASE("gradient vanishes at the one-dimensional optimum") {
    const QuadratureRule rule = hermite_rule(5);
    // Numerically maximize the frozen objective in theta, then test
    // stationarity there.
    auto ctx = make_context({30.0}, {100.0}, {-0.8}, 0.3, rule);
    const MarginalIntegrand h(ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma);
    const FrozenSubject f = freeze(rule, adapt(h, ctx.sigma));
    const Eigen::VectorXd rest =
        rest_without_pair(f, ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma, 0);

    const double opt = oracles::concave_argmax(
        [&](double t) { return theta_partial(f, rest, 30.0, 100.0, t).value; }, -8.0, 8.0);
    ctx.theta_row[0] = opt;
    CHECK(std::abs(block_gradient_theta(f, ctx, 0)) < 1e-6);
}

TEST_CASE("more edges raise the theta gradient") {
    const QuadratureRule rule = hermite_rule(5);
    double previous = -1e300;
    for (double count : {10.0, 40.0, 70.0}) {
        const auto ctx = make_context({count}, {100.0}, {-0.5}, 0.2, rule);
        const MarginalIntegrand h(ctx.counts, ctx.totals, ctx.theta_row, ctx.sigma);
        const FrozenSubject f = freeze(rule, adapt(h, ctx.sigma));
        const double grad = block_gradient_theta(f, ctx, 0);
        CHECK(grad > previous);
        previous = grad;
    }
}
