#include "orbitkit/exterior.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace orbitkit;

namespace {

Matrix<Rational> random_rational(int n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-6, 6), den(1, 4);
    Matrix<Rational> m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = Rational(num(rng), den(rng));
    return m;
}

// Minor oracle by explicit 2x2 cofactor formula.
Rational minor2(const Matrix<Rational>& g, int r0, int r1, int c0, int c1) {
    return g(r0, c0) * g(r1, c1) - g(r0, c1) * g(r1, c0);
}

} // namespace

TEST(MultiIndex, RejectsInvalid) {
    EXPECT_THROW(MultiIndex(3, std::vector<int>{}), std::invalid_argument);
    EXPECT_THROW(MultiIndex(3, std::vector<int>{2, 1}), std::invalid_argument);
    EXPECT_THROW(MultiIndex(3, std::vector<int>{1, 4}), std::invalid_argument);
    EXPECT_THROW(MultiIndex(9, std::vector<int>{1}), std::invalid_argument);
    EXPECT_EQ(MultiIndex(4, std::vector<int>{1, 3}).str(), "{1,3}");
}

TEST(WedgeAction, IdentityReadsOffBasis) {
    const auto g = Matrix<Rational>::identity(3);
    const auto w = wedge_action(g, MultiIndex(3, {1, 3}));
    ASSERT_EQ(w.coords.size(), 1u);
    EXPECT_EQ(w[MultiIndex(3, {1, 3})], 1);
    EXPECT_EQ(w[MultiIndex(3, {1, 2})], 0);
}

TEST(WedgeAction, SingleColumn) {
    Matrix<Rational> g{{1, 5}, {0, 1}};
    const auto w = wedge_action(g, MultiIndex(2, {2}));
    EXPECT_EQ(w[MultiIndex(2, {1})], 5);
    EXPECT_EQ(w[MultiIndex(2, {2})], 1);
}

TEST(WedgeAction, ExampleFamilyAtTwoMatchesMinorOracle) {
    Matrix<Rational> g{{1, 2, 2}, {0, 1, 2}, {0, 0, 1}};
    const auto w = wedge_action(g, MultiIndex(3, {2, 3}));
    EXPECT_EQ(w[MultiIndex(3, {1, 2})], 2);
    EXPECT_EQ(w[MultiIndex(3, {1, 3})], 2);
    EXPECT_EQ(w[MultiIndex(3, {2, 3})], 1);
    for (const auto& J : multi_indices_of_size(3, 2)) {
        const auto r = J.zero_based();
        EXPECT_EQ(w[J], minor2(g, r[0], r[1], 1, 2));
    }
}

TEST(WedgeAction, DimensionMismatchThrows) {
    EXPECT_THROW(wedge_action(Matrix<Rational>::identity(3), MultiIndex(2, {1})), DimensionMismatch);
}

TEST(WedgeNorm, Examples) {
    EXPECT_DOUBLE_EQ(wedge_norm(Matrix<double>::identity(4), MultiIndex(4, {2, 4})), 1.0);
    Matrix<Rational> g{{1, 5}, {0, 1}};
    EXPECT_NEAR(wedge_norm(g, MultiIndex(2, {2})), std::sqrt(26.0), 1e-15);
    EXPECT_EQ(wedge_norm_squared(g, MultiIndex(2, {2})), 26);
}

TEST(WedgeNorm, FullIndexIsDeterminant) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 3;
        Matrix<Rational> g = random_rational(n, rng);
        const Rational d = det_gauss(g);
        if (d == 0) continue;
        // scale the first row so det = 1 exactly
        for (int j = 0; j < n; ++j) g(0, j) /= d;
        EXPECT_EQ(wedge_norm_squared(g, MultiIndex::full(n)), 1);
        const auto gd = g.map([](const Rational& q) { return to_double(q); });
        EXPECT_NEAR(wedge_norm(gd, MultiIndex::full(n)), 1.0, 1e-10);
    }
}

TEST(WedgeAction, CauchyBinetProperty) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 3;
        const auto g = random_rational(n, rng);
        const auto h = random_rational(n, rng);
        for (const auto& I : all_multi_indices(n)) {
            const auto lhs = wedge_action(g * h, I);
            const auto rhs = apply_wedge(g, wedge_action(h, I));
            EXPECT_EQ(lhs.coords, rhs.coords) << "n=" << n << " I=" << I.str();
        }
    }
}

TEST(WedgeNorm, UnipotentUpperAtLeastOne) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> num(-20, 20);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 4;
        auto g = Matrix<Rational>::identity(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) g(i, j) = Rational(num(rng), 3);
        for (const auto& I : all_multi_indices(n)) EXPECT_GE(wedge_norm_squared(g, I), 1);
    }
}

TEST(Omega, Examples) {
    EXPECT_EQ(omega(MultiIndex(4, {1, 3}), LieAVector({1, -2, 1, 0})), 2.0);
    EXPECT_EQ(omega(MultiIndex(2, {2}), LieAVector({3, -3})), -3.0);
    EXPECT_EQ(omega(MultiIndex::full(3), RationalLieAVector({Rational(1, 3), Rational(-1), Rational(2, 3)})), 0);
    EXPECT_THROW(LieAVector({1, 1}), std::invalid_argument);
}

TEST(Polynomial, WedgeOverPolynomials) {
    using P = RationalPolynomial;
    Matrix<P> g(2, 2);
    g(0, 0) = P(Rational(1));
    g(1, 1) = P(Rational(1));
    g(0, 1) = P::monomial(1, 1);
    const auto w = wedge_action(g, MultiIndex(2, {2}));
    EXPECT_EQ(w[MultiIndex(2, {1})], P::monomial(1, 1));
    EXPECT_EQ(wedge_action(g, MultiIndex::full(2))[MultiIndex::full(2)], P(Rational(1)));
}

TEST(Rational, StrictParsing) {
    EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
    EXPECT_EQ(parse_rational("-7"), Rational(-7));
    EXPECT_THROW(parse_rational("1/0"), ParseError);
    EXPECT_THROW(parse_rational("1.5"), ParseError);
    EXPECT_THROW(parse_rational(" 1"), ParseError);
    EXPECT_THROW(parse_rational("1/-2"), ParseError);
    EXPECT_NEAR(log_rational(Rational(BigInt(1) << 3000)), 3000 * std::log(2.0), 1e-9);
}
