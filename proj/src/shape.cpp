#include "mesbm/shape.hpp"

namespace mesbm {

ShapeKind parse_shape_kind(const std::string& text) {
    if (text == "increasing") return ShapeKind::Increasing;
    if (text == "decreasing") return ShapeKind::Decreasing;
    if (text == "unimodal") return ShapeKind::Unimodal;
    if (text == "inverse-unimodal") return ShapeKind::InverseUnimodal;
    if (text == "auto") return ShapeKind::Auto;
    throw DataError("unknown shape constraint '" + text +
                    "' (expected auto, increasing, decreasing, unimodal or "
                    "inverse-unimodal)");
}

std::string shape_kind_name(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::Increasing: return "increasing";
        case ShapeKind::Decreasing: return "decreasing";
        case ShapeKind::Unimodal: return "unimodal";
        case ShapeKind::InverseUnimodal: return "inverse-unimodal";
        case ShapeKind::Auto: return "auto";
    }
    throw DataError("invalid shape constraint value");
}

ShapeProjection project_shape(const Eigen::Ref<const Eigen::VectorXd>& v, ShapeKind kind) {
    ShapeProjection out;
    if (kind == ShapeKind::Auto) kind = select_shape_auto(v);
    out.resolved = kind;
    switch (kind) {
        case ShapeKind::Increasing:
            out.values = isotonic_increasing(v);
            break;
        case ShapeKind::Decreasing:
            out.values = isotonic_decreasing(v);
            break;
        case ShapeKind::Unimodal: {
            auto fit = unimodal_project(v);
            out.values = std::move(fit.values);
            out.mode = fit.mode;
            break;
        }
        case ShapeKind::InverseUnimodal: {
            auto fit = inverse_unimodal_project(v);
            out.values = std::move(fit.values);
            out.mode = fit.mode;
            break;
        }
        case ShapeKind::Auto:
            throw DataError("shape constraint failed to resolve");
    }
    out.sse = (out.values - v).squaredNorm();
    return out;
}

}  // namespace mesbm
