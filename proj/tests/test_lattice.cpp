#include "orbitkit/families.hpp"
#include "orbitkit/lattice.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace orbitkit;

namespace {

double brute_force_svp(const Eigen::MatrixXd& B, int box) {
    const int d = static_cast<int>(B.cols());
    std::vector<int> x(d, -box);
    double best = std::numeric_limits<double>::infinity();
    for (;;) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(B.rows());
        bool zero = true;
        for (int j = 0; j < d; ++j) {
            v += x[j] * B.col(j);
            zero = zero && x[j] == 0;
        }
        if (!zero) best = std::min(best, v.norm());
        int j = 0;
        while (j < d && x[j] == box) x[j++] = -box;
        if (j == d) break;
        ++x[j];
    }
    return best;
}

Eigen::MatrixXd random_basis(std::mt19937_64& rng, int d) {
    std::uniform_real_distribution<double> u(-2, 2);
    for (;;) {
        Eigen::MatrixXd B(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) B(i, j) = u(rng);
        if (std::abs(B.determinant()) > 0.5) return B;
    }
}

Rational brute_force_gram_min(const Matrix<Rational>& G, int box) {
    const int d = static_cast<int>(G.rows());
    std::vector<int> x(d, -box);
    Rational best = -1;
    for (;;) {
        bool zero = true;
        for (int v : x) zero = zero && v == 0;
        if (!zero) {
            Rational s = 0;
            for (int p = 0; p < d; ++p)
                for (int q = 0; q < d; ++q) s += Rational(x[p] * x[q]) * G(p, q);
            if (best < 0 || s < best) best = s;
        }
        int j = 0;
        while (j < d && x[j] == box) x[j++] = -box;
        if (j == d) break;
        ++x[j];
    }
    return best;
}

const WeightSpace& find_weight(const std::vector<WeightSpace>& spaces, const std::vector<int>& chi) {
    for (const auto& W : spaces)
        if (canonical_weight(W.weight) == canonical_weight(chi)) return W;
    throw std::runtime_error("weight not found");
}

Matrix<Rational> random_unipotent(std::mt19937_64& rng, int n) {
    std::uniform_int_distribution<int> num(-9, 9);
    auto g = Matrix<Rational>::identity(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g(i, j) = Rational(num(rng), 1 + std::abs(num(rng)));
    return g;
}

} // namespace

TEST(ShortestVector, Examples) {
    for (int d = 1; d <= 6; ++d) EXPECT_NEAR(shortest_vector(LatticeBasis::from(Eigen::MatrixXd::Identity(d, d))).length, 1.0, 1e-12);
    Eigen::MatrixXd B(2, 2);
    B << 2, 0, 0, 0.5;
    EXPECT_NEAR(shortest_vector(LatticeBasis::from(B)).length, 0.5, 1e-12);
    Eigen::MatrixXd hex(2, 2);
    hex << 1, 0.5, 0, std::sqrt(3.0) / 2;
    EXPECT_NEAR(shortest_vector(LatticeBasis::from(hex)).length, 1.0, 1e-12);
    // D4: integer vectors with even coordinate sum
    Eigen::MatrixXd d4(4, 4);
    d4 << 2, 1, 1, 1, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
    EXPECT_NEAR(shortest_vector(LatticeBasis::from(d4)).length, std::sqrt(2.0), 1e-12);
    // skewed basis of Z^2
    Eigen::MatrixXd skew(2, 2);
    skew << 1, 1000, 0, 1;
    EXPECT_NEAR(shortest_vector(LatticeBasis::from(skew)).length, 1.0, 1e-9);
}

TEST(ShortestVector, Errors) {
    Eigen::MatrixXd sing(2, 2);
    sing << 1, 2, 2, 4;
    EXPECT_THROW(LatticeBasis::from(sing), SingularMatrix);
    EXPECT_THROW(shortest_vector(LatticeBasis::from(Eigen::MatrixXd::Identity(13, 13))), CapExceeded);
}

TEST(ShortestVector, MatchesBruteForce) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::MatrixXd B = random_basis(rng, 3);
        const auto sv = shortest_vector(LatticeBasis::from(B));
        EXPECT_NEAR(sv.length, brute_force_svp(B, 8), 1e-9) << "trial " << trial;
        // returned vector lies in the lattice
        const Eigen::VectorXd c = B.fullPivLu().solve(sv.vector);
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(c(j), std::round(c(j)), 1e-6);
        EXPECT_NEAR(sv.vector.norm(), sv.length, 1e-9);
    }
}

TEST(ShortestVector, NotLongerThanReducedBasis) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = 2 + trial % 5;
        const Eigen::MatrixXd B = random_basis(rng, d);
        const MatrixLD R = lll_reduce(B.cast<long double>());
        const double len = shortest_vector(LatticeBasis::from(B)).length;
        for (int j = 0; j < d; ++j) EXPECT_LE(len, static_cast<double>(R.col(j).norm()) + 1e-12);
        // Minkowski
        EXPECT_LE(len, std::sqrt(static_cast<double>(d)) * std::pow(std::abs(B.determinant()), 1.0 / d) + 1e-12);
    }
}

TEST(Lll, UnimodularAndReduced) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = 2 + trial % 6;
        const Eigen::MatrixXd B = random_basis(rng, d);
        const MatrixLD R = lll_reduce(B.cast<long double>());
        EXPECT_NEAR(std::abs(static_cast<double>(R.determinant())), std::abs(B.determinant()), 1e-9 * std::abs(B.determinant()));
        const Eigen::MatrixXd U = B.fullPivLu().solve(R.cast<double>());
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) EXPECT_NEAR(U(i, j), std::round(U(i, j)), 1e-6);
        const Gso g = gso_from_gram(R.transpose() * R);
        for (int k = 1; k < d; ++k) {
            for (int j = 0; j < k; ++j) EXPECT_LE(std::abs(static_cast<double>(g.mu(k, j))), 0.5 + 1e-9);
            EXPECT_GE(static_cast<double>(g.bstar(k)),
                      static_cast<double>((kLllDelta - g.mu(k, k - 1) * g.mu(k, k - 1)) * g.bstar(k - 1)) * (1 - 1e-9));
        }
    }
}

TEST(CountPoints, Examples) {
    const auto Z2 = LatticeBasis::from(Eigen::MatrixXd::Identity(2, 2));
    EXPECT_EQ(count_points_in_ball(Z2, 1.5), 8);
    EXPECT_EQ(count_points_in_ball(Z2, 1.0), 4);
    EXPECT_EQ(count_points_in_ball(Z2, 0.99), 0);
    EXPECT_EQ(count_points_in_ball(Z2, 5.0), 80);
    EXPECT_EQ(count_points_in_ball(Z2, 0.0), 0);
    EXPECT_EQ(count_points_in_ball(LatticeBasis::from(Eigen::MatrixXd::Identity(3, 3)), 1.0), 6);
    EXPECT_THROW(count_points_in_ball(LatticeBasis::from(Eigen::MatrixXd::Identity(7, 7)), 1.0), CapExceeded);
    EXPECT_THROW(count_points_in_ball(Z2, 4000.0), CapExceeded);
}

TEST(CountPoints, MonotoneEvenAndBruteForce) {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd B = random_basis(rng, 2 + trial % 2);
        const auto L = LatticeBasis::from(B);
        std::int64_t prev = 0;
        for (double r : {0.5, 1.0, 2.0, 3.0, 4.0}) {
            const auto c = count_points_in_ball(L, r);
            EXPECT_EQ(c % 2, 0);
            EXPECT_GE(c, prev);
            prev = c;
        }
        if (B.cols() == 2) {
            std::int64_t brute = 0;
            for (int a = -40; a <= 40; ++a)
                for (int b = -40; b <= 40; ++b)
                    if ((a || b) && (a * B.col(0) + b * B.col(1)).norm() <= 3.0) ++brute;
            EXPECT_EQ(count_points_in_ball(L, 3.0), brute);
        }
    }
}

TEST(WeightSpaces, Sl2AndSl3) {
    const auto w21 = weight_spaces(2, 1);
    ASSERT_EQ(w21.size(), 3u);
    for (const auto& W : w21) EXPECT_EQ(W.rank(), 1u);
    const auto w31 = weight_spaces(3, 1);
    EXPECT_EQ(w31.size(), 7u);
    int roots = 0;
    for (const auto& W : w31) {
        if (W.rank() == 1) ++roots;
        else EXPECT_EQ(W.rank(), 2u);
    }
    EXPECT_EQ(roots, 6);
    EXPECT_EQ(find_weight(w31, {0, 0, 0}).rank(), 2u);
}

TEST(WeightSpaces, RanksPartitionTheWedge) {
    for (int n : {2, 3}) {
        const int D = n * n - 1;
        for (int l = 1; l < D; ++l) {
            std::size_t total = 0, top = 0;
            for (const auto& W : weight_spaces(n, l)) {
                total += W.rank();
                top = std::max(top, W.rank());
                EXPECT_EQ(W.l, l);
            }
            EXPECT_EQ(static_cast<double>(total), binomial(D, l));
            EXPECT_LE(top, 12u);
        }
    }
    EXPECT_THROW(weight_spaces(5, 1), CapExceeded);
    EXPECT_THROW(weight_spaces(3, 0), std::invalid_argument);
}

TEST(CanonicalWeight, ModuloAllOnes) {
    EXPECT_EQ(canonical_weight({1, 0, -1}), canonical_weight({2, 1, 0}));
    EXPECT_NE(canonical_weight({1, -1, 0}), canonical_weight({1, 0, -1}));
}

TEST(AdjointGram, IdentityAndOrthogonalInvariance) {
    const auto M = adjoint_gram(Matrix<Rational>::identity(3));
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 8; ++b) EXPECT_EQ(M(a, b), Rational(a == b ? 1 : 0));
    EXPECT_EQ(M(6, 6), 2);
    EXPECT_EQ(M(6, 7), -1);
    EXPECT_EQ(M(7, 7), 2);
    // rational rotation (3/5, 4/5) embedded in SO(3)
    Matrix<Rational> k = Matrix<Rational>::identity(3);
    k(0, 0) = Rational(3, 5);
    k(0, 1) = Rational(-4, 5);
    k(1, 0) = Rational(4, 5);
    k(1, 1) = Rational(3, 5);
    EXPECT_EQ(adjoint_gram(k), M);
}

TEST(GramMinNorm, MatchesBruteForce) {
    EXPECT_EQ(gram_min_norm(Matrix<Rational>{{2, -1}, {-1, 2}}).norm_squared, 2);
    std::mt19937_64 rng(15);
    std::uniform_int_distribution<int> num(-4, 4);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 2 + trial % 2;
        Matrix<Rational> A(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) A(i, j) = Rational(num(rng), 1 + std::abs(num(rng)));
        if (det_gauss(A) == 0) continue;
        const auto G = A.transpose() * A;
        const Rational exact = gram_min_norm(G).norm_squared;
        EXPECT_LE(exact, brute_force_gram_min(G, 6));
        EXPECT_EQ(exact, brute_force_gram_min(G, 12)) << "trial " << trial;
    }
}

TEST(WeightMinNorm, Examples) {
    const auto I2 = Matrix<Rational>::identity(2);
    const auto w = weight_spaces(2, 1);
    EXPECT_NEAR(weight_min_norm(I2, 1, find_weight(w, {1, -1})).norm, 1.0, 1e-15);
    EXPECT_NEAR(weight_min_norm(I2, 1, find_weight(w, {0, 0})).norm, std::sqrt(2.0), 1e-15);
    const Matrix<Rational> g{{1, 5}, {0, 1}};
    EXPECT_NEAR(weight_min_norm(g, 1, find_weight(w, {1, -1})).norm, 1.0, 1e-15);
    EXPECT_THROW(weight_min_norm(I2, 2, find_weight(w, {1, -1})), std::invalid_argument);
    EXPECT_THROW(weight_min_norm(I2, 1, find_weight(w, {1, -1}), MinNormMode::Exact, 0), CapExceeded);
}

TEST(WeightMinNorm, ZeroWeightBoundedBelowForUnipotent) {
    std::mt19937_64 rng(16);
    for (int l : {1, 2, 3}) {
        const auto spaces = weight_spaces(3, l);
        const auto& W0 = find_weight(spaces, {0, 0, 0});
        const double base = weight_min_norm(Matrix<Rational>::identity(3), l, W0).norm;
        for (int trial = 0; trial < 5; ++trial) {
            const auto g = random_unipotent(rng, 3);
            EXPECT_GE(weight_min_norm(g, l, W0).norm, base * (1 - 1e-12)) << "l=" << l;
        }
    }
}

TEST(WeightMinNorm, BasisOnlyIsUpperBound) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        const auto g = random_unipotent(rng, 3);
        const auto M = adjoint_gram(g);
        for (int l : {1, 2, 4}) {
            for (const auto& W : weight_spaces(3, l)) {
                const auto exact = weight_min_norm(g, l, W, MinNormMode::Exact, 12, &M);
                const auto loose = weight_min_norm(g, l, W, MinNormMode::BasisOnly, 12, &M);
                EXPECT_LE(exact.norm_squared, loose.norm_squared);
                EXPECT_GT(exact.norm_squared, 0);
            }
        }
    }
}

TEST(WedgeGram, CauchyBinetGradeTwo) {
    std::mt19937_64 rng(18);
    const auto g = random_unipotent(rng, 3);
    const auto M = adjoint_gram(g);
    for (const auto& W : weight_spaces(3, 2)) {
        const auto G = wedge_gram(M, W);
        for (std::size_t p = 0; p < W.rank(); ++p)
            for (std::size_t q = 0; q < W.rank(); ++q) {
                const auto& a = W.basis[p];
                const auto& b = W.basis[q];
                EXPECT_EQ(G(p, q), M(a[0], b[0]) * M(a[1], b[1]) - M(a[0], b[1]) * M(a[1], b[0]));
            }
    }
}
