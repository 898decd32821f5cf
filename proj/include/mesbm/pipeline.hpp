#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "mesbm/data_model.hpp"
#include "mesbm/optimizer.hpp"
#include "mesbm/shape.hpp"
#include "mesbm/tuning.hpp"

namespace mesbm {

// One community pair's three estimate stages plus its tuning record.
struct BlockFit {
    std::string label;  // "k-l"
    ShapeKind requested = ShapeKind::Auto;
    ShapeKind resolved = ShapeKind::Auto;
    int mode = 0;  // peak (or valley) index for unimodal kinds, 0 otherwise
    Eigen::VectorXd unconstrained;  // step-1 column
    Eigen::VectorXd shaped;         // shape-projected
    Eigen::VectorXd fused;          // fused at b_star
    int b_star = 1;
    int df = 1;
    Eigen::VectorXd bic_trace;
};

struct FitResult {
    FitConfig config;
    ShapeKind shape = ShapeKind::Auto;  // requested constraint for all blocks
    int K = 0;
    int num_nodes = 0;
    long num_subjects = 0;
    TimePartition partition;
    SigmaVector sigma;
    std::vector<double> objective_trace;
    bool converged = false;
    int iterations = 0;
    long quad_fallbacks = 0;
    long line_search_failures = 0;
    std::vector<BlockFit> blocks;
    bool time_normalized = false;  // times were min-max rescaled at ingestion
    double time_min = 0.0;         // original bounds when rescaled
    double time_max = 1.0;
};

// Runs the full three-step estimation: subjects are stably sorted by time,
// partitioned, fit without constraints, then each block column is shape
// projected and fused at its BIC-selected level.
FitResult fit_pipeline(const std::vector<SubjectNetwork>& subjects,
                       const CommunityAssignment& assignment, const FitConfig& config,
                       ShapeKind shape);

}  // namespace mesbm
