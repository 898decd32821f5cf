#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mesbm/errors.hpp>
#include <mesbm/fusion.hpp>
#include <mesbm/shape.hpp>

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "oracles.hpp"

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

bool same(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.size() == b.size() && (a.array() == b.array()).all();
}

// Pieces of v delimited by the b-1 largest consecutive gaps, averaged by hand.
double piece_mean(const Eigen::VectorXd& v, Eigen::Index lo, Eigen::Index hi) {
    long double sum = 0;
    for (Eigen::Index i = lo; i <= hi; ++i) sum += v[i];
    return static_cast<double>(sum / static_cast<long double>(hi - lo + 1));
}

}  // namespace

using namespace mesbm;

TEST_CASE("fuse reproduces the worked five-interval example exactly") {
    const Eigen::VectorXd v = vec({0.1, 0.2, 0.3, 0.5, 0.6});
    FusedVector<double> out = fuse(v, 2);
    CHECK(same(out.values, vec({0.2, 0.2, 0.2, 0.55, 0.55})));
    CHECK(out.df == 2);
    CHECK(out.boundaries == std::vector<int>{2});
}

TEST_CASE("fuse with b equal to length is the identity") {
    const Eigen::VectorXd v = vec({0.4, -1.0, 2.5, 2.5, 0.0});
    FusedVector<double> out = fuse(v, 5);
    CHECK(same(out.values, v));
    CHECK(out.df == 4);  // the repeated 2.5 forms one run
}

TEST_CASE("fuse with b = 1 averages everything") {
    const Eigen::VectorXd v = vec({0.1, 0.2, 0.3, 0.5, 0.6});
    FusedVector<double> out = fuse(v, 1);
    CHECK(out.df == 1);
    CHECK((out.values.array() == out.values[0]).all());
    CHECK(out.values[0] == doctest::Approx(0.34).epsilon(1e-12));
}

TEST_CASE("degrees of freedom counts maximal constant runs") {
    CHECK(degrees_of_freedom(vec({0.2, 0.2, 0.2, 0.55, 0.55})) == 2);
    CHECK(degrees_of_freedom(vec({7, 7, 7, 7})) == 1);
    CHECK(degrees_of_freedom(vec({1, 2, 3, 4, 5})) == 5);
    CHECK(degrees_of_freedom(vec({1, 1, 2, 1, 1})) == 3);
    CHECK(degrees_of_freedom(vec({3})) == 1);
}

TEST_CASE("fused output has at most b pieces") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> level(-2.0, 2.0);
    for (int rep = 0; rep < 200; ++rep) {
        const Eigen::Index S = 2 + static_cast<Eigen::Index>(rng() % 12);
        Eigen::VectorXd v(S);
        for (Eigen::Index s = 0; s < S; ++s) v[s] = level(rng);
        for (int b = 1; b <= static_cast<int>(S); ++b) {
            FusedVector<double> out = fuse(v, b);
            CHECK(out.values.size() == S);
            CHECK(degrees_of_freedom(out.values) <= b);
            CHECK(out.df == degrees_of_freedom(out.values));
        }
    }
}

TEST_CASE("fusing an already fused curve changes nothing") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> level(-2.0, 2.0);
    for (int rep = 0; rep < 200; ++rep) {
        const Eigen::Index S = 3 + static_cast<Eigen::Index>(rng() % 10);
        Eigen::VectorXd v(S);
        for (Eigen::Index s = 0; s < S; ++s) v[s] = level(rng);
        const int b = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(S));
        FusedVector<double> once = fuse(v, b);
        FusedVector<double> twice = fuse(once.values, b);
        CHECK(same(twice.values, once.values));
        // A curve with at most b runs survives any larger budget too.
        FusedVector<double> loose = fuse(once.values, static_cast<int>(S));
        CHECK(same(loose.values, once.values));
    }
}

TEST_CASE("equal gaps break toward the earlier split") {
    // Gaps are 1, 0, 1; keeping one split must pick the first gap.
    const Eigen::VectorXd v = vec({0, 1, 1, 2});
    FusedVector<double> out = fuse(v, 2);
    CHECK(out.values[0] == 0.0);
    CHECK(out.values[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(same(out.values.segment(1, 3), Eigen::VectorXd::Constant(3, out.values[1])));
}

TEST_CASE("constant input is returned untouched for every budget") {
    const Eigen::VectorXd v = Eigen::VectorXd::Constant(6, 0.37);
    for (int b = 1; b <= 6; ++b) {
        FusedVector<double> out = fuse(v, b);
        CHECK(same(out.values, v));
        CHECK(out.df == 1);
    }
}

TEST_CASE("fuse validates the piece budget") {
    const Eigen::VectorXd v = vec({1, 2, 3});
    CHECK_THROWS_AS(fuse(v, 0), DataError);
    CHECK_THROWS_AS(fuse(v, 4), DataError);
    CHECK_THROWS_AS(fuse(Eigen::VectorXd(), 1), DataError);
}

TEST_CASE("shape classes survive fusion") {
    std::mt19937_64 rng(43);
    for (int rep = 0; rep < 1000; ++rep) {
        const Eigen::Index S = 4 + static_cast<Eigen::Index>(rng() % 9);
        const int b = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(S));
        const Eigen::VectorXd inc = oracles::random_increasing(rng, S);
        CHECK(oracles::is_nondecreasing(fuse(inc, b).values));
        CHECK(oracles::is_nonincreasing(fuse((-inc).eval(), b).values));
        const Eigen::VectorXd uni = oracles::random_unimodal(rng, S);
        CHECK(oracles::is_unimodal(fuse(uni, b).values));
        CHECK(oracles::is_inverse_unimodal(fuse((-uni).eval(), b).values));
    }
}

TEST_CASE("piece means match a direct computation of the kept segments") {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> level(-3.0, 3.0);
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::Index S = 5 + static_cast<Eigen::Index>(rng() % 6);
        Eigen::VectorXd v(S);
        for (Eigen::Index s = 0; s < S; ++s) v[s] = level(rng);
        const int b = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(S));
        FusedVector<double> out = fuse(v, b);
        // Each output run must equal the mean of the inputs it covers.
        Eigen::Index lo = 0;
        while (lo < S) {
            Eigen::Index hi = lo;
            while (hi + 1 < S && out.values[hi + 1] == out.values[lo]) ++hi;
            CHECK(out.values[lo] == doctest::Approx(piece_mean(v, lo, hi)).epsilon(1e-13));
            lo = hi + 1;
        }
    }
}
