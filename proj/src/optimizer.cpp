#include "mesbm/optimizer.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace mesbm {

namespace {

// Keeps the logistic well away from saturated probabilities.
constexpr double kThetaMin = -30.0;
constexpr double kThetaMax = 30.0;

// Safeguarded 1-D Newton ascent on [lo, hi]: steps that would lower the
// value are halved up to 50 times, then the current point is kept and the
// failure counted. Stops once the accepted step drops below tol.
double maximize_1d(const std::function<Smooth1D(double)>& f, double x0, double lo, double hi,
                   double tol, long* failures) {
    constexpr int kMaxIters = 80;
    double x = std::clamp(x0, lo, hi);
    Smooth1D cur = f(x);
    for (int it = 0; it < kMaxIters; ++it) {
        double raw = cur.d2 < 0.0 ? -cur.d1 / cur.d2 : (cur.d1 > 0.0 ? 0.5 : -0.5);
        if (cur.d1 == 0.0) break;
        double step = std::clamp(x + raw, lo, hi) - x;
        if (step == 0.0) break;  // pinned at a bound

        Smooth1D trial = f(x + step);
        bool accepted = true;
        for (int h = 0; !std::isfinite(trial.value) || trial.value < cur.value; ++h) {
            if (h == 50) {
                accepted = false;
                break;
            }
            step *= 0.5;
            trial = f(x + step);
        }
        if (!accepted) {
            if (failures != nullptr) ++*failures;
            break;
        }
        x += step;
        cur = trial;
        if (std::abs(step) < tol) break;
    }
    return x;
}

std::vector<int> interval_subjects(const std::vector<int>& tau, int s) {
    std::vector<int> subjects;
    for (size_t i = 0; i < tau.size(); ++i) {
        if (tau[i] == s) subjects.push_back(static_cast<int>(i));
    }
    return subjects;
}

}  // namespace

std::pair<ThetaMatrix, SigmaVector> initialize(const BlockSufficientStats& stats,
                                               const std::vector<int>& tau, int S) {
    const int P = stats.num_pairs();
    ThetaMatrix theta(S, P);
    SigmaVector sigma = SigmaVector::Constant(S, 0.1);

    for (int s = 1; s <= S; ++s) {
        Eigen::VectorXd edge_sum = Eigen::VectorXd::Zero(P);
        long count = 0;
        for (size_t i = 0; i < tau.size(); ++i) {
            if (tau[i] != s) continue;
            edge_sum += stats.edge_counts.row(static_cast<Eigen::Index>(i)).transpose();
            ++count;
        }
        if (count == 0) {
            throw DataError("interval " + std::to_string(s) +
                            " contains no subjects; lower the interval count or "
                            "use equal-count partitioning");
        }
        for (int p = 0; p < P; ++p) {
            const double rate =
                (edge_sum[p] + 0.5) / (static_cast<double>(count) * stats.dyad_totals[p] + 1.0);
            theta(s - 1, p) = logit(rate);
        }
    }
    return {theta, sigma};
}

double update_sigma_block(int s, const ThetaMatrix& theta, const SigmaVector& sigma,
                          const BlockSufficientStats& stats, const std::vector<int>& tau,
                          const std::vector<FrozenSubject>& frozen, double inner_tol,
                          long* line_search_failures) {
    const std::vector<int> subjects = interval_subjects(tau, s);
    const Eigen::VectorXd theta_row = theta.row(s - 1).transpose();

    std::vector<Eigen::VectorXd> rests;
    rests.reserve(subjects.size());
    for (int i : subjects) {
        rests.push_back(rest_without_sigma(frozen[static_cast<size_t>(i)],
                                           stats.edge_counts.row(i).transpose(),
                                           stats.dyad_totals, theta_row));
    }

    const auto objective = [&](double m) {
        const double sig = std::exp(m);
        Smooth1D total;
        for (size_t j = 0; j < subjects.size(); ++j) {
            const Smooth1D part =
                sigma_partial(frozen[static_cast<size_t>(subjects[j])], rests[j], sig);
            total.value += part.value;
            // Chain rule onto the log scale.
            total.d1 += sig * part.d1;
            total.d2 += sig * sig * part.d2 + sig * part.d1;
        }
        return total;
    };

    const double m = maximize_1d(objective, std::log(sigma[s - 1]), std::log(kSigmaMin),
                                 std::log(kSigmaMax), inner_tol, line_search_failures);
    return std::clamp(std::exp(m), kSigmaMin, kSigmaMax);
}

Eigen::RowVectorXd update_theta_row(int s, const ThetaMatrix& theta, const SigmaVector& sigma,
                                    const BlockSufficientStats& stats,
                                    const std::vector<int>& tau,
                                    const std::vector<FrozenSubject>& frozen, double inner_tol,
                                    long* line_search_failures) {
    const int P = stats.num_pairs();
    const std::vector<int> subjects = interval_subjects(tau, s);
    const double sig = sigma[s - 1];

    Eigen::RowVectorXd row = theta.row(s - 1);
    for (int p = 0; p < P; ++p) {
        std::vector<Eigen::VectorXd> rests;
        rests.reserve(subjects.size());
        for (int i : subjects) {
            rests.push_back(rest_without_pair(frozen[static_cast<size_t>(i)],
                                              stats.edge_counts.row(i).transpose(),
                                              stats.dyad_totals, row.transpose(), sig, p));
        }
        const double total_p = stats.dyad_totals[p];

        const auto objective = [&](double theta_p) {
            Smooth1D total;
            for (size_t j = 0; j < subjects.size(); ++j) {
                const int i = subjects[j];
                const Smooth1D part =
                    theta_partial(frozen[static_cast<size_t>(i)], rests[j],
                                  stats.edge_counts(i, p), total_p, theta_p);
                total.value += part.value;
                total.d1 += part.d1;
                total.d2 += part.d2;
            }
            return total;
        };

        row[p] = maximize_1d(objective, row[p], kThetaMin, kThetaMax, inner_tol,
                             line_search_failures);
    }
    return row;
}

UnconstrainedFit fit_unconstrained(const BlockSufficientStats& stats,
                                   const std::vector<int>& tau, const QuadratureRule& rule,
                                   const FitConfig& config) {
    const int S = config.S;
    const int N = stats.num_subjects();
    if (static_cast<int>(tau.size()) != N) {
        throw DataError("interval map covers " + std::to_string(tau.size()) +
                        " subjects but the data has " + std::to_string(N));
    }
    for (int t : tau) {
        if (t < 1 || t > S) {
            throw DataError("interval index " + std::to_string(t) + " outside 1.." +
                            std::to_string(S));
        }
    }

    UnconstrainedFit fit;
    std::tie(fit.theta, fit.sigma) = initialize(stats, tau, S);

    std::vector<FrozenSubject> frozen(static_cast<size_t>(N));
    std::vector<Eigen::VectorXd> counts(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) {
        counts[static_cast<size_t>(i)] = stats.edge_counts.row(i).transpose();
    }

    for (int q = 0; q < config.max_outer_iters; ++q) {
        // Re-adapt each subject, but never accept an adaptation that scores
        // the current parameters lower than the frozen one; this keeps the
        // objective trace non-increasing across sweeps.
        for (int i = 0; i < N; ++i) {
            const size_t ui = static_cast<size_t>(i);
            const int s = tau[ui] - 1;
            const Eigen::VectorXd theta_row = fit.theta.row(s).transpose();
            const MarginalIntegrand h(counts[ui], stats.dyad_totals, theta_row, fit.sigma[s]);
            const AdaptedRule adapted = adapt(h, fit.sigma[s]);
            if (adapted.fallback) ++fit.quad_fallbacks;
            FrozenSubject candidate = freeze(rule, adapted);
            if (q == 0 ||
                frozen_loglik(candidate, counts[ui], stats.dyad_totals, theta_row,
                              fit.sigma[s]) >= frozen_loglik(frozen[ui], counts[ui],
                                                             stats.dyad_totals, theta_row,
                                                             fit.sigma[s])) {
                frozen[ui] = std::move(candidate);
            }
        }

        for (int s = 1; s <= S; ++s) {
            fit.sigma[s - 1] = update_sigma_block(s, fit.theta, fit.sigma, stats, tau, frozen,
                                                  config.inner_tol, &fit.line_search_failures);
        }
        for (int s = 1; s <= S; ++s) {
            fit.theta.row(s - 1) = update_theta_row(s, fit.theta, fit.sigma, stats, tau, frozen,
                                                    config.inner_tol,
                                                    &fit.line_search_failures);
        }

        KahanSum loglik;
        for (int i = 0; i < N; ++i) {
            const size_t ui = static_cast<size_t>(i);
            const int s = tau[ui] - 1;
            loglik.add(frozen_loglik(frozen[ui], counts[ui], stats.dyad_totals,
                                     fit.theta.row(s).transpose(), fit.sigma[s]));
        }
        fit.objective_trace.push_back(-loglik.value());
        fit.iterations = q + 1;

        if (q >= 1) {
            const double prev = fit.objective_trace[static_cast<size_t>(q) - 1];
            const double cur = fit.objective_trace[static_cast<size_t>(q)];
            if (std::abs(cur - prev) / (std::abs(prev) + 1.0) < config.objective_rel_tol) {
                fit.converged = true;
                break;
            }
        }
    }
    return fit;
}

}  // namespace mesbm
