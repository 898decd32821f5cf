#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "mesbm/errors.hpp"

namespace mesbm {

enum class ShapeKind { Increasing, Decreasing, Unimodal, InverseUnimodal, Auto };

ShapeKind parse_shape_kind(const std::string& text);
std::string shape_kind_name(ShapeKind kind);

template <typename Scalar>
using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;

// Euclidean projection onto the non-decreasing cone via pooled-means PAVA;
// O(S).
template <typename Derived>
VectorX<typename Derived::Scalar> isotonic_increasing(const Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index S = v.size();

    // Pooled blocks as (sum, count); a block's value is its mean.
    std::vector<Scalar> sums(static_cast<size_t>(S));
    std::vector<Eigen::Index> counts(static_cast<size_t>(S));
    size_t top = 0;
    for (Eigen::Index i = 0; i < S; ++i) {
        sums[top] = v[i];
        counts[top] = 1;
        ++top;
        while (top >= 2 &&
               sums[top - 2] * counts[top - 1] > sums[top - 1] * counts[top - 2]) {
            sums[top - 2] += sums[top - 1];
            counts[top - 2] += counts[top - 1];
            --top;
        }
    }

    VectorX<Scalar> out(S);
    Eigen::Index pos = 0;
    for (size_t blk = 0; blk < top; ++blk) {
        const Scalar mean = counts[blk] == 1 ? sums[blk] : sums[blk] / Scalar(counts[blk]);
        for (Eigen::Index j = 0; j < counts[blk]; ++j) out[pos++] = mean;
    }
    return out;
}

template <typename Derived>
VectorX<typename Derived::Scalar> isotonic_decreasing(const Eigen::MatrixBase<Derived>& v) {
    return (-isotonic_increasing((-v).eval())).eval();
}

template <typename Scalar>
struct UnimodalFit {
    VectorX<Scalar> values;
    Scalar sse = 0;
    int mode = 0;  // 1-based peak (valley for the inverse problem)
};

// Euclidean projection onto the unimodal set (non-decreasing up to a peak,
// non-increasing after). The set is the union over m of
// { u : u[0..m-1] non-decreasing, u[m..S-1] non-increasing }, and on each
// member the projection splits into two independent isotonic fits, so the
// best concatenation over m is the exact projection. SSE ties pick the
// smallest m; the reported mode is the last position of the fitted maximum.
template <typename Derived>
UnimodalFit<typename Derived::Scalar> unimodal_project(const Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index S = v.size();

    UnimodalFit<Scalar> best;
    bool have_best = false;
    for (Eigen::Index m = 1; m <= S; ++m) {
        VectorX<Scalar> fit(S);
        fit.head(m) = isotonic_increasing(v.head(m));
        if (m < S) fit.tail(S - m) = isotonic_decreasing(v.tail(S - m));
        const Scalar sse = (fit - v).squaredNorm();
        if (!have_best || sse < best.sse) {
            best.values = std::move(fit);
            best.sse = sse;
            have_best = true;
        }
    }

    Eigen::Index peak = 0;
    for (Eigen::Index i = 1; i < S; ++i) {
        if (best.values[i] >= best.values[peak]) peak = i;
    }
    best.mode = static_cast<int>(peak) + 1;
    return best;
}

template <typename Derived>
UnimodalFit<typename Derived::Scalar> inverse_unimodal_project(
    const Eigen::MatrixBase<Derived>& v) {
    UnimodalFit<typename Derived::Scalar> fit = unimodal_project((-v).eval());
    fit.values = -fit.values;
    return fit;
}

// Resolves the Auto constraint: whichever of Unimodal / InverseUnimodal
// projects with smaller SSE; ties pick Unimodal.
template <typename Derived>
ShapeKind select_shape_auto(const Eigen::MatrixBase<Derived>& v) {
    const auto uni = unimodal_project(v);
    const auto inv = inverse_unimodal_project(v);
    return uni.sse <= inv.sse ? ShapeKind::Unimodal : ShapeKind::InverseUnimodal;
}

struct ShapeProjection {
    Eigen::VectorXd values;
    ShapeKind resolved = ShapeKind::Increasing;
    int mode = 0;  // peak (or valley) for the unimodal kinds, 0 otherwise
    double sse = 0.0;
};

// Projection under the requested constraint; Auto resolves first.
ShapeProjection project_shape(const Eigen::Ref<const Eigen::VectorXd>& v, ShapeKind kind);

}  // namespace mesbm
