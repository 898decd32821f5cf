#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "mesbm/data_model.hpp"

namespace mesbm {

// Identifier of the exact pseudo-random recipe used by generate(); recorded
// in truth files so datasets are comparable across runs of this
// implementation only.
inline constexpr const char* kRngAlgorithm =
    "splitmix64-streams/mt19937_64/u53/box-muller/v1";

enum class CurveKind { Step, PiecewiseLinear };

// Scalar function on [0, 1]. Step: values[j] on the half-open interval
// (knots[j], knots[j + 1]] with t = 0 mapped to the first interval, so
// values.size() == knots.size() - 1. PiecewiseLinear: values at the knots,
// interpolated in between.
struct Curve {
    CurveKind kind = CurveKind::Step;
    Eigen::VectorXd knots;   // strictly increasing, first 0, last 1
    Eigen::VectorXd values;

    double operator()(double t) const;
};

Curve step_curve(const std::vector<double>& interior_knots, const std::vector<double>& levels);
Curve linear_curve(const std::vector<double>& knots, const std::vector<double>& values);

// Ground truth of a simulation: block connectivity curves on the probability
// scale and the random-effect standard deviation curve.
struct Scenario {
    std::string name;  // "A", "B", "C" or "custom"
    int n = 0;
    int K = 0;
    std::vector<long> community_sizes;
    std::vector<Curve> block_probability;  // one per pair column
    Curve sigma_curve;
    long num_subjects = 0;
    std::uint64_t seed = 0;
};

// Rejects probabilities outside [0, 1], negative sd values, size/count
// mismatches and a non-positive subject count.
void validate_scenario(const Scenario& scenario);

// The desk-scale designs: n = 75, K = 2, sizes {50, 25}. A and B share step
// connectivity (within-community rising through breakpoints {0.2, 0.5, 0.7},
// between-community falling through {0.3, 0.5, 0.8}); A has constant
// sigma = 0.1 while B drops sigma from 0.2 to 0.1 after t = 0.5. C replaces
// the steps with linear ramps (within over [0.2, 0.6], between over
// [0.4, 0.8]) and keeps B's sigma.
Scenario example_scenario(const std::string& id, long num_subjects, std::uint64_t seed);

struct GeneratedDataset {
    std::vector<SubjectNetwork> subjects;  // sorted by time
    CommunityAssignment assignment;
    Scenario scenario;
};

// Draws times from stream 0 and, per subject i, the random effect followed
// by every dyad in lexicographic order from stream i; the dataset is a pure
// function of the scenario.
GeneratedDataset generate(const Scenario& scenario);

enum class ErrorScale { Probability, Logit };

ErrorScale parse_error_scale(const std::string& text);
std::string error_scale_name(ErrorScale scale);

// Integrals over (0, 1] of (estimate - truth)^2 (num) and truth^2 (den) on
// the chosen scale. The estimate is a logit-scale step function; the truth
// curve is on the probability scale. Pieces where both factors are constant
// integrate exactly; pieces with non-constant truth are refined to a
// 1e-4-wide grid and integrated by Simpson's rule.
struct CurveDistance {
    double num = 0.0;
    double den = 0.0;
};

CurveDistance curve_distance(const StepFunction& estimate_logit, const Curve& truth_prob,
                             ErrorScale scale);

// num / den; rejects an identically-zero truth.
double relative_error(const StepFunction& estimate_logit, const Curve& truth_prob,
                      ErrorScale scale);

// sqrt(num): unnormalized L2 function distance.
double l2_distance(const StepFunction& estimate_logit, const Curve& truth_prob,
                   ErrorScale scale);

// Truth levels at the midpoints of a partition's intervals on the chosen
// scale; exact when the curve is constant within every interval.
Eigen::VectorXd curve_interval_levels(const Curve& truth_prob,
                                      const Eigen::VectorXd& boundaries, ErrorScale scale);

}  // namespace mesbm
