#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <string>
#include <type_traits>
#include <vector>

#include "mesbm/errors.hpp"
#include "mesbm/shape.hpp"

namespace mesbm {

template <typename Scalar>
struct FusedVector {
    VectorX<Scalar> values;
    std::vector<int> boundaries;  // 0-based i where values[i] != values[i + 1]
    int df = 0;                   // number of maximal constant runs
};

// Number of maximal constant runs.
template <typename Derived>
int degrees_of_freedom(const Eigen::MatrixBase<Derived>& v) {
    int runs = v.size() > 0 ? 1 : 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (v[i] != v[i - 1]) ++runs;
    }
    return runs;
}

// Hard-threshold fusion: keep the b - 1 consecutive differences of largest
// absolute value (ties resolved toward the earliest index), then average v
// within the resulting runs. An already-constant run is passed through
// unchanged, which makes the operator exactly idempotent.
template <typename Derived>
FusedVector<typename Derived::Scalar> fuse(const Eigen::MatrixBase<Derived>& v, int b) {
    using Scalar = typename Derived::Scalar;
    const int S = static_cast<int>(v.size());
    if (b < 1 || b > S) {
        throw DataError("fusion level " + std::to_string(b) + " outside 1.." +
                        std::to_string(S));
    }

    std::vector<int> order(static_cast<size_t>(S - 1));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        using std::abs;
        return abs(v[i + 1] - v[i]) > abs(v[j + 1] - v[j]);
    });

    std::vector<int> kept(order.begin(), order.begin() + (b - 1));
    std::sort(kept.begin(), kept.end());

    // Run means accumulate in extended precision so short runs of decimal
    // inputs round to the decimal mean.
    using Acc = std::conditional_t<std::is_floating_point_v<Scalar>, long double, Scalar>;

    FusedVector<Scalar> out;
    out.values.resize(S);
    int start = 0;
    for (size_t r = 0; r <= kept.size(); ++r) {
        const int end = r < kept.size() ? kept[r] + 1 : S;  // run is [start, end)
        Scalar lo = v[start];
        Scalar hi = v[start];
        Acc sum = 0;
        for (int i = start; i < end; ++i) {
            using std::max;
            using std::min;
            lo = min(lo, v[i]);
            hi = max(hi, v[i]);
            sum += Acc(v[i]);
        }
        const Scalar level = lo == hi ? lo : static_cast<Scalar>(sum / Acc(end - start));
        for (int i = start; i < end; ++i) out.values[i] = level;
        start = end;
    }

    for (int i = 0; i + 1 < S; ++i) {
        if (out.values[i] != out.values[i + 1]) out.boundaries.push_back(i);
    }
    out.df = static_cast<int>(out.boundaries.size()) + 1;
    return out;
}

}  // namespace mesbm
