#include "mesbm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "mesbm/numeric.hpp"

namespace mesbm {

double Curve::operator()(double t) const {
    const int idx = interval_of(knots, t);
    if (kind == CurveKind::Step) return values[idx - 1];
    const double lo = knots[idx - 1];
    const double hi = knots[idx];
    const double u = (t - lo) / (hi - lo);
    return values[idx - 1] + u * (values[idx] - values[idx - 1]);
}

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void validate_curve(const Curve& curve, const std::string& what, double lo, double hi) {
    const Eigen::Index M = curve.knots.size();
    if (M < 2 || curve.knots[0] != 0.0 || curve.knots[M - 1] != 1.0) {
        throw DataError(what + ": curve knots must start at 0 and end at 1");
    }
    for (Eigen::Index j = 1; j < M; ++j) {
        if (!(curve.knots[j] > curve.knots[j - 1])) {
            throw DataError(what + ": curve knots must be strictly increasing");
        }
    }
    const Eigen::Index expect = curve.kind == CurveKind::Step ? M - 1 : M;
    if (curve.values.size() != expect) {
        throw DataError(what + ": curve has " + std::to_string(curve.values.size()) +
                        " values for " + std::to_string(M) + " knots");
    }
    for (Eigen::Index j = 0; j < curve.values.size(); ++j) {
        if (!(curve.values[j] >= lo && curve.values[j] <= hi)) {
            throw DataError(what + ": level " + std::to_string(curve.values[j]) +
                            " outside [" + std::to_string(lo) + ", " + std::to_string(hi) +
                            "]");
        }
    }
}

// splitmix64 finalizer; derives independent stream seeds from (seed, stream).
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(mix64(seed + mix64(stream)));
}

// Uniform on [0, 1) from the top 53 bits.
double next_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller; consumes exactly two uniforms.
double next_normal(std::mt19937_64& rng) {
    const double u1 = 1.0 - next_uniform(rng);  // (0, 1]
    const double u2 = next_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

Curve step_curve(const std::vector<double>& interior_knots, const std::vector<double>& levels) {
    Curve curve;
    curve.kind = CurveKind::Step;
    curve.knots.resize(static_cast<Eigen::Index>(interior_knots.size()) + 2);
    curve.knots[0] = 0.0;
    for (size_t j = 0; j < interior_knots.size(); ++j) {
        curve.knots[static_cast<Eigen::Index>(j) + 1] = interior_knots[j];
    }
    curve.knots[curve.knots.size() - 1] = 1.0;
    curve.values = to_vector(levels);
    return curve;
}

Curve linear_curve(const std::vector<double>& knots, const std::vector<double>& values) {
    Curve curve;
    curve.kind = CurveKind::PiecewiseLinear;
    curve.knots = to_vector(knots);
    curve.values = to_vector(values);
    return curve;
}

void validate_scenario(const Scenario& scenario) {
    if (scenario.n < 2) throw DataError("scenario needs at least 2 nodes");
    if (scenario.K < 1) throw DataError("scenario needs at least 1 community");
    if (scenario.num_subjects < 1) throw DataError("scenario needs at least 1 subject");
    if (static_cast<int>(scenario.community_sizes.size()) != scenario.K) {
        throw DataError("scenario lists " + std::to_string(scenario.community_sizes.size()) +
                        " community sizes for K = " + std::to_string(scenario.K));
    }
    long total = 0;
    for (long nk : scenario.community_sizes) {
        if (nk < 1) throw DataError("scenario has an empty community");
        total += nk;
    }
    if (total != scenario.n) {
        throw DataError("community sizes sum to " + std::to_string(total) + ", not n = " +
                        std::to_string(scenario.n));
    }
    const int P = pair_count(scenario.K);
    if (static_cast<int>(scenario.block_probability.size()) != P) {
        throw DataError("scenario lists " +
                        std::to_string(scenario.block_probability.size()) +
                        " block curves for " + std::to_string(P) + " community pairs");
    }
    for (int p = 0; p < P; ++p) {
        validate_curve(scenario.block_probability[static_cast<size_t>(p)],
                       "block " + pair_label(p, scenario.K), 0.0, 1.0);
    }
    validate_curve(scenario.sigma_curve, "sigma", 0.0, kSigmaMax);
}

Scenario example_scenario(const std::string& id, long num_subjects, std::uint64_t seed) {
    if (id != "A" && id != "B" && id != "C") {
        throw DataError("unknown example '" + id + "' (expected A, B or C)");
    }

    Scenario scenario;
    scenario.name = id;
    scenario.n = 75;
    scenario.K = 2;
    scenario.community_sizes = {50, 25};
    scenario.num_subjects = num_subjects;
    scenario.seed = seed;

    Curve within, between;
    if (id == "C") {
        within = linear_curve({0.0, 0.2, 0.6, 1.0}, {0.10, 0.10, 0.55, 0.55});
        between = linear_curve({0.0, 0.4, 0.8, 1.0}, {0.28, 0.28, 0.08, 0.08});
    } else {
        within = step_curve({0.2, 0.5, 0.7}, {0.15, 0.25, 0.35, 0.45});
        between = step_curve({0.3, 0.5, 0.8}, {0.25, 0.20, 0.15, 0.10});
    }
    scenario.block_probability = {within, between, within};

    scenario.sigma_curve = id == "A" ? step_curve({}, {0.1}) : step_curve({0.5}, {0.2, 0.1});

    validate_scenario(scenario);
    return scenario;
}

GeneratedDataset generate(const Scenario& scenario) {
    validate_scenario(scenario);
    const long N = scenario.num_subjects;
    const int n = scenario.n;
    const int K = scenario.K;
    const int P = pair_count(K);

    GeneratedDataset data;
    data.scenario = scenario;

    std::vector<int> memberships(static_cast<size_t>(n));
    {
        int node = 0;
        for (int k = 1; k <= K; ++k) {
            for (long j = 0; j < scenario.community_sizes[static_cast<size_t>(k - 1)]; ++j) {
                memberships[static_cast<size_t>(node++)] = k;
            }
        }
    }
    data.assignment = make_assignment(memberships, K);

    std::vector<double> times(static_cast<size_t>(N));
    {
        std::mt19937_64 rng = stream_rng(scenario.seed, 0);
        for (long i = 0; i < N; ++i) times[static_cast<size_t>(i)] = next_uniform(rng);
        std::sort(times.begin(), times.end());
    }

    const int id_width = static_cast<int>(std::to_string(N).size());
    data.subjects.resize(static_cast<size_t>(N));
    for (long i = 0; i < N; ++i) {
        SubjectNetwork& subject = data.subjects[static_cast<size_t>(i)];
        const double t = times[static_cast<size_t>(i)];
        std::string index = std::to_string(i + 1);
        subject.subject_id = "s" + std::string(static_cast<size_t>(id_width) - index.size(), '0') + index;
        subject.time = t;

        std::mt19937_64 rng = stream_rng(scenario.seed, static_cast<std::uint64_t>(i) + 1);
        const double w = scenario.sigma_curve(t) * next_normal(rng);

        // Edge probability with the subject effect; the degenerate levels 0
        // and 1 stay exact.
        Eigen::VectorXd prob(P);
        for (int p = 0; p < P; ++p) {
            const double base = scenario.block_probability[static_cast<size_t>(p)](t);
            prob[p] = (base <= 0.0 || base >= 1.0) ? base : logistic(logit(base) + w);
        }

        for (int a = 1; a <= n; ++a) {
            for (int b = a + 1; b <= n; ++b) {
                const double u = next_uniform(rng);
                const int ca = memberships[static_cast<size_t>(a - 1)];
                const int cb = memberships[static_cast<size_t>(b - 1)];
                const int p = pair_index(std::min(ca, cb), std::max(ca, cb), K);
                if (u < prob[p]) subject.edges.push_back({a, b});
            }
        }
    }
    return data;
}

ErrorScale parse_error_scale(const std::string& text) {
    if (text == "probability") return ErrorScale::Probability;
    if (text == "logit") return ErrorScale::Logit;
    throw DataError("unknown error scale '" + text + "' (expected probability or logit)");
}

std::string error_scale_name(ErrorScale scale) {
    return scale == ErrorScale::Probability ? "probability" : "logit";
}

namespace {

double truth_on_scale(const Curve& truth_prob, double t, ErrorScale scale) {
    const double p = truth_prob(t);
    if (scale == ErrorScale::Probability) return p;
    const double theta = logit(p);
    if (!std::isfinite(theta)) {
        throw DataError("logit-scale comparison undefined for truth probability " +
                        std::to_string(p));
    }
    return theta;
}

}  // namespace

CurveDistance curve_distance(const StepFunction& estimate_logit, const Curve& truth_prob,
                             ErrorScale scale) {
    std::set<double> cuts(estimate_logit.boundaries.data(),
                          estimate_logit.boundaries.data() + estimate_logit.boundaries.size());
    cuts.insert(truth_prob.knots.data(),
                truth_prob.knots.data() + truth_prob.knots.size());
    cuts.insert(0.0);
    cuts.insert(1.0);
    const std::vector<double> grid(cuts.lower_bound(0.0), cuts.upper_bound(1.0));

    CurveDistance out;
    for (size_t g = 0; g + 1 < grid.size(); ++g) {
        const double x0 = grid[g];
        const double x1 = grid[g + 1];
        const double len = x1 - x0;
        const double mid = 0.5 * (x0 + x1);
        const double est_theta = estimate_logit(mid);
        const double est = scale == ErrorScale::Probability ? logistic(est_theta) : est_theta;

        if (truth_prob.kind == CurveKind::Step) {
            const double tv = truth_on_scale(truth_prob, mid, scale);
            out.num += len * (est - tv) * (est - tv);
            out.den += len * tv * tv;
        } else {
            // Refine to the 1e-4 grid and integrate each cell by Simpson's
            // rule; exact for the probability scale, where the integrands
            // are quadratics in t.
            const long cells = std::max(1L, std::lround(std::ceil(len * 1e4)));
            const double h = len / static_cast<double>(cells);
            for (long c = 0; c < cells; ++c) {
                const double a = x0 + h * static_cast<double>(c);
                const double b = a + h;
                const double m = 0.5 * (a + b);
                double num3 = 0.0;
                double den3 = 0.0;
                const double ta = truth_on_scale(truth_prob, a, scale);
                const double tm = truth_on_scale(truth_prob, m, scale);
                const double tb = truth_on_scale(truth_prob, b, scale);
                num3 = (est - ta) * (est - ta) + 4.0 * (est - tm) * (est - tm) +
                       (est - tb) * (est - tb);
                den3 = ta * ta + 4.0 * tm * tm + tb * tb;
                out.num += h / 6.0 * num3;
                out.den += h / 6.0 * den3;
            }
        }
    }
    return out;
}

double relative_error(const StepFunction& estimate_logit, const Curve& truth_prob,
                      ErrorScale scale) {
    const CurveDistance d = curve_distance(estimate_logit, truth_prob, scale);
    if (d.den == 0.0) {
        throw DataError("relative error undefined: the truth is identically zero");
    }
    return d.num / d.den;
}

double l2_distance(const StepFunction& estimate_logit, const Curve& truth_prob,
                   ErrorScale scale) {
    return std::sqrt(curve_distance(estimate_logit, truth_prob, scale).num);
}

Eigen::VectorXd curve_interval_levels(const Curve& truth_prob,
                                      const Eigen::VectorXd& boundaries, ErrorScale scale) {
    const Eigen::Index S = boundaries.size() - 1;
    Eigen::VectorXd levels(S);
    for (Eigen::Index s = 0; s < S; ++s) {
        levels[s] = truth_on_scale(truth_prob, 0.5 * (boundaries[s] + boundaries[s + 1]), scale);
    }
    return levels;
}

}  // namespace mesbm
