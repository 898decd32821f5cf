#include "mesbm/pipeline.hpp"

#include <algorithm>
#include <numeric>

namespace mesbm {

FitResult fit_pipeline(const std::vector<SubjectNetwork>& subjects,
                       const CommunityAssignment& assignment, const FitConfig& config,
                       ShapeKind shape) {
    std::vector<size_t> order(subjects.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return subjects[a].time < subjects[b].time; });

    std::vector<SubjectNetwork> sorted;
    sorted.reserve(subjects.size());
    std::vector<double> times;
    times.reserve(subjects.size());
    for (size_t i : order) {
        sorted.push_back(subjects[i]);
        times.push_back(subjects[i].time);
    }

    FitResult result;
    result.config = config;
    result.shape = shape;
    result.K = assignment.K;
    result.num_nodes = assignment.n();
    result.num_subjects = static_cast<long>(subjects.size());

    const BlockSufficientStats stats = build_sufficient_stats(sorted, assignment);
    result.partition = build_partition(times, config.S, config.partition);
    const std::vector<int> tau = assign_intervals(result.partition, times);
    const QuadratureRule rule = hermite_rule(config.quad_points);

    UnconstrainedFit step1 = fit_unconstrained(stats, tau, rule, config);
    result.sigma = step1.sigma;
    result.objective_trace = std::move(step1.objective_trace);
    result.converged = step1.converged;
    result.iterations = step1.iterations;
    result.quad_fallbacks = step1.quad_fallbacks;
    result.line_search_failures = step1.line_search_failures;

    const int P = stats.num_pairs();
    result.blocks.resize(static_cast<size_t>(P));
    for (int p = 0; p < P; ++p) {
        BlockFit& block = result.blocks[static_cast<size_t>(p)];
        block.label = pair_label(p, assignment.K);
        block.requested = shape;
        block.unconstrained = step1.theta.col(p);

        const ShapeProjection projection = project_shape(block.unconstrained, shape);
        block.resolved = projection.resolved;
        block.mode = projection.mode;
        block.shaped = projection.values;

        const BlockTuning tuning =
            tune_fusion(block.shaped, step1.sigma, stats.edge_counts.col(p),
                        stats.dyad_totals[p], tau, rule);
        block.fused = tuning.fused;
        block.b_star = tuning.b_star;
        block.df = tuning.df;
        block.bic_trace = tuning.bic_trace;
    }
    return result;
}

}  // namespace mesbm
