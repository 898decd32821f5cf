#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>

namespace mesbm {

// log(1 + e^x), stable on both tails.
inline double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double logistic(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// log of the N(0, sigma^2) density at w.
inline double log_normal_pdf(double w, double sigma) {
    static const double kLogSqrt2Pi = 0.5 * std::log(2.0 * M_PI);
    const double z = w / sigma;
    return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

inline double log_sum_exp(std::span<const double> terms) {
    double m = -std::numeric_limits<double>::infinity();
    for (double t : terms) m = std::max(m, t);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

// Compensated accumulator; keeps long reductions independent of chunking
// to well below 1e-9.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - carry_;
        const double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

}  // namespace mesbm
