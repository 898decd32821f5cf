#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "mesbm/errors.hpp"

namespace mesbm {

inline constexpr double kSigmaMin = 1e-4;
inline constexpr double kSigmaMax = 10.0;

// Unordered node pair, 1-based indices, a < b.
struct Edge {
    int a = 0;
    int b = 0;
};

// One subject's undirected simple graph and its normalized observation time.
struct SubjectNetwork {
    std::string subject_id;
    double time = 0.0;  // in [0, 1]
    std::vector<Edge> edges;
};

// Known node-to-community map; labels are 1..K and every community is
// nonempty.
struct CommunityAssignment {
    std::vector<int> memberships;
    int K = 0;
    std::vector<long> community_sizes;

    int n() const { return static_cast<int>(memberships.size()); }
};

// Validates labels and fills community_sizes. Throws DataError on empty
// communities or labels outside 1..K.
CommunityAssignment make_assignment(std::vector<int> memberships, int K);

inline int pair_count(int K) { return K * (K + 1) / 2; }

// Column of pair (k, l), 1 <= k <= l <= K, in the fixed order
// (1,1),(1,2),...,(1,K),(2,2),...,(2,K),...,(K,K). Zero-based.
inline int pair_index(int k, int l, int K) {
    return (k - 1) * K - (k - 1) * (k - 2) / 2 + (l - k);
}

// Label of column p as "k-l".
std::string pair_label(int p, int K);

// Per-subject block edge counts and the shared per-block dyad totals.
struct BlockSufficientStats {
    // edge_counts(i, p) = number of edges of subject i between pair column p.
    Eigen::MatrixXd edge_counts;
    // dyad_totals(p) = number of dyads between that pair: n_k * n_l off the
    // diagonal, n_k * (n_k - 1) / 2 within a community.
    Eigen::VectorXd dyad_totals;

    int num_subjects() const { return static_cast<int>(edge_counts.rows()); }
    int num_pairs() const { return static_cast<int>(edge_counts.cols()); }
};

// Tallies block counts. Rejects out-of-range node indices, self-loops and
// duplicate edges, naming the offending subject.
BlockSufficientStats build_sufficient_stats(const std::vector<SubjectNetwork>& networks,
                                            const CommunityAssignment& assignment);

enum class PartitionMode { EqualLength, EqualCount };

PartitionMode parse_partition_mode(const std::string& text);
std::string partition_mode_name(PartitionMode mode);

// Partition of (0, 1] into S half-open intervals (t_{s-1}, t_s].
struct TimePartition {
    Eigen::VectorXd boundaries;  // length S + 1; boundaries[0] = 0, boundaries[S] = 1
    PartitionMode mode = PartitionMode::EqualLength;
    std::vector<std::string> warnings;

    int S() const { return static_cast<int>(boundaries.size()) - 1; }
};

// Builds the partition from sorted times in [0, 1]. Equal-length boundaries
// are s / S; equal-count boundaries sit between distinct time values so tied
// times never straddle a boundary, with a warning when ties (or too few
// distinct values) prevent balanced occupancy.
TimePartition build_partition(const std::vector<double>& times, int S, PartitionMode mode);

// 1-based interval index of time t; t = 0 maps to interval 1 and each
// boundary belongs to the interval on its left.
int interval_of(const Eigen::VectorXd& boundaries, double t);

// tau[i] = interval_of(times[i]) for each subject.
std::vector<int> assign_intervals(const TimePartition& partition,
                                  const std::vector<double>& times);

// S x pair_count(K) matrix of step values; column p follows pair_index.
using ThetaMatrix = Eigen::MatrixXd;

// Length-S standard deviations, each within [kSigmaMin, kSigmaMax].
using SigmaVector = Eigen::VectorXd;

// Piecewise-constant function on (0, 1]: levels[s-1] on (t_{s-1}, t_s].
struct StepFunction {
    Eigen::VectorXd boundaries;  // length S + 1
    Eigen::VectorXd levels;      // length S

    double operator()(double t) const { return levels[interval_of(boundaries, t) - 1]; }
};

}  // namespace mesbm
