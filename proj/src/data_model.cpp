#include "mesbm/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mesbm {

CommunityAssignment make_assignment(std::vector<int> memberships, int K) {
    if (K < 1) throw DataError("community count K must be at least 1");
    if (memberships.empty()) throw DataError("membership vector is empty");
    std::vector<long> sizes(static_cast<size_t>(K), 0);
    for (size_t j = 0; j < memberships.size(); ++j) {
        const int c = memberships[j];
        if (c < 1 || c > K) {
            std::ostringstream msg;
            msg << "node " << (j + 1) << " has community label " << c
                << " outside 1.." << K;
            throw DataError(msg.str());
        }
        ++sizes[static_cast<size_t>(c - 1)];
    }
    for (int k = 0; k < K; ++k) {
        if (sizes[static_cast<size_t>(k)] == 0) {
            std::ostringstream msg;
            msg << "community " << (k + 1) << " is empty";
            throw DataError(msg.str());
        }
    }
    CommunityAssignment out;
    out.memberships = std::move(memberships);
    out.K = K;
    out.community_sizes = std::move(sizes);
    return out;
}

std::string pair_label(int p, int K) {
    for (int k = 1; k <= K; ++k) {
        for (int l = k; l <= K; ++l) {
            if (pair_index(k, l, K) == p) {
                return std::to_string(k) + "-" + std::to_string(l);
            }
        }
    }
    throw DataError("pair column " + std::to_string(p) + " out of range");
}

BlockSufficientStats build_sufficient_stats(const std::vector<SubjectNetwork>& networks,
                                            const CommunityAssignment& assignment) {
    const int n = assignment.n();
    const int K = assignment.K;
    const int P = pair_count(K);

    BlockSufficientStats stats;
    stats.dyad_totals.resize(P);
    for (int k = 1; k <= K; ++k) {
        for (int l = k; l <= K; ++l) {
            const double nk = static_cast<double>(assignment.community_sizes[k - 1]);
            const double nl = static_cast<double>(assignment.community_sizes[l - 1]);
            stats.dyad_totals[pair_index(k, l, K)] =
                (k == l) ? nk * (nk - 1.0) / 2.0 : nk * nl;
        }
    }

    stats.edge_counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(networks.size()), P);
    for (size_t i = 0; i < networks.size(); ++i) {
        const SubjectNetwork& net = networks[i];
        std::set<std::pair<int, int>> seen;
        for (const Edge& e : net.edges) {
            const int a = std::min(e.a, e.b);
            const int b = std::max(e.a, e.b);
            if (a < 1 || b > n) {
                std::ostringstream msg;
                msg << "subject " << net.subject_id << ": edge (" << e.a << ", "
                    << e.b << ") has a node index outside 1.." << n;
                throw DataError(msg.str());
            }
            if (a == b) {
                std::ostringstream msg;
                msg << "subject " << net.subject_id << ": self-loop at node " << a;
                throw DataError(msg.str());
            }
            if (!seen.insert({a, b}).second) {
                std::ostringstream msg;
                msg << "subject " << net.subject_id << ": duplicate edge (" << a
                    << ", " << b << ")";
                throw DataError(msg.str());
            }
            const int ca = assignment.memberships[a - 1];
            const int cb = assignment.memberships[b - 1];
            const int k = std::min(ca, cb);
            const int l = std::max(ca, cb);
            stats.edge_counts(static_cast<Eigen::Index>(i), pair_index(k, l, K)) += 1.0;
        }
    }
    return stats;
}

PartitionMode parse_partition_mode(const std::string& text) {
    if (text == "equal-length") return PartitionMode::EqualLength;
    if (text == "equal-count") return PartitionMode::EqualCount;
    throw DataError("unknown partition mode '" + text +
                    "' (expected equal-length or equal-count)");
}

std::string partition_mode_name(PartitionMode mode) {
    return mode == PartitionMode::EqualLength ? "equal-length" : "equal-count";
}

namespace {

// Boundaries at subject-count quantiles, placed only between distinct time
// values so tie runs stay whole. When distinct values run out before S - 1
// boundaries are placed, the rest are spaced evenly up to 1.
Eigen::VectorXd equal_count_boundaries(const std::vector<double>& times, int S,
                                       std::vector<std::string>* warnings) {
    const long N = static_cast<long>(times.size());

    std::vector<double> distinct;
    std::vector<long> cum;  // subjects at or below distinct[j]
    for (double t : times) {
        if (distinct.empty() || t > distinct.back()) {
            distinct.push_back(t);
            cum.push_back(0);
        }
        ++cum.back();
    }
    for (size_t j = 1; j < cum.size(); ++j) cum[j] += cum[j - 1];

    // Usable interior boundary values: strictly inside (0, 1).
    long first = 0;
    long last = static_cast<long>(distinct.size()) - 1;
    while (first <= last && distinct[static_cast<size_t>(first)] <= 0.0) ++first;
    while (last >= first && distinct[static_cast<size_t>(last)] >= 1.0) --last;

    Eigen::VectorXd boundaries(S + 1);
    boundaries[0] = 0.0;
    boundaries[S] = 1.0;

    long next = first;
    bool exhausted = false;
    for (int s = 1; s < S; ++s) {
        if (!exhausted) {
            const long target = (static_cast<long>(s) * N) / S;
            long j = next;
            while (j <= last && cum[static_cast<size_t>(j)] < target) ++j;
            if (j > last) {
                exhausted = true;
            } else {
                boundaries[s] = distinct[static_cast<size_t>(j)];
                next = j + 1;
            }
        }
        if (exhausted) {
            const double lo = boundaries[s - 1];
            const int remaining = S - (s - 1);
            boundaries[s] = lo + (1.0 - lo) / remaining;
        }
    }
    if (exhausted && warnings != nullptr) {
        warnings->push_back(
            "equal-count partition: fewer usable distinct time values than "
            "boundaries; trailing boundaries were spaced evenly");
    }

    if (warnings != nullptr) {
        std::vector<long> occupancy(static_cast<size_t>(S), 0);
        for (double t : times) ++occupancy[static_cast<size_t>(interval_of(boundaries, t) - 1)];
        const auto [lo, hi] = std::minmax_element(occupancy.begin(), occupancy.end());
        if (*hi - *lo > 1) {
            std::ostringstream msg;
            msg << "equal-count partition: tied time values leave interval "
                   "occupancy unbalanced (min "
                << *lo << ", max " << *hi << ")";
            warnings->push_back(msg.str());
        }
    }
    return boundaries;
}

}  // namespace

TimePartition build_partition(const std::vector<double>& times, int S, PartitionMode mode) {
    const long N = static_cast<long>(times.size());
    if (S < 1) throw DataError("interval count S must be at least 1");
    if (static_cast<long>(S) > N) {
        throw DataError("interval count S = " + std::to_string(S) +
                        " exceeds the number of subjects " + std::to_string(N));
    }
    for (size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0 && times[i] <= 1.0)) {
            throw DataError("time " + std::to_string(times[i]) + " is outside [0, 1]");
        }
        if (i > 0 && times[i] < times[i - 1]) throw DataError("times are not sorted");
    }

    TimePartition partition;
    partition.mode = mode;
    if (mode == PartitionMode::EqualLength) {
        partition.boundaries.resize(S + 1);
        for (int s = 0; s <= S; ++s) {
            partition.boundaries[s] = static_cast<double>(s) / S;
        }
    } else {
        partition.boundaries = equal_count_boundaries(times, S, &partition.warnings);
    }
    return partition;
}

int interval_of(const Eigen::VectorXd& boundaries, double t) {
    const int S = static_cast<int>(boundaries.size()) - 1;
    // First boundary at or above t, searching t_1..t_S; each interval is
    // (t_{s-1}, t_s] and t <= t_1 maps to interval 1.
    const double* begin = boundaries.data() + 1;
    const double* end = boundaries.data() + S + 1;
    const double* it = std::lower_bound(begin, end, t);
    if (it == end) --it;
    return static_cast<int>(it - begin) + 1;
}

std::vector<int> assign_intervals(const TimePartition& partition,
                                  const std::vector<double>& times) {
    std::vector<int> tau(times.size());
    for (size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0 && times[i] <= 1.0)) {
            throw DataError("time " + std::to_string(times[i]) + " is outside [0, 1]");
        }
        tau[i] = interval_of(partition.boundaries, times[i]);
    }
    return tau;
}

}  // namespace mesbm
