#pragma once

#include "orbitkit/exterior.hpp"
#include "orbitkit/families.hpp"
#include "orbitkit/matrix.hpp"
#include "orbitkit/rational.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbitkit {

struct CapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using MatrixLD = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorLD = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

inline constexpr long double kLllDelta = 0.99L;

struct LatticeBasis {
    MatrixLD columns;
    long double det = 0;

    LatticeBasis() = default;
    explicit LatticeBasis(MatrixLD B) : columns(std::move(B)) {
        if (columns.rows() != columns.cols() || columns.rows() == 0) throw DimensionMismatch("lattice basis must be square");
        det = columns.determinant();
        long double scale = 1;
        for (Eigen::Index j = 0; j < columns.cols(); ++j) scale *= std::max<long double>(columns.col(j).norm(), 1e-300L);
        if (!(std::abs(det) > 1e-14L * scale)) throw SingularMatrix("singular lattice basis");
    }
    static LatticeBasis from(const Eigen::MatrixXd& B) { return LatticeBasis(B.cast<long double>()); }

    int dim() const { return static_cast<int>(columns.cols()); }
};

struct Gso {
    MatrixLD mu;   // mu(i, j) for j < i
    VectorLD bstar;
};

inline Gso gso_from_gram(const MatrixLD& G) {
    const auto d = G.rows();
    Gso g{MatrixLD::Zero(d, d), VectorLD::Zero(d)};
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            long double s = G(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= g.mu(j, k) * g.mu(i, k) * g.bstar(k);
            g.mu(i, j) = s / g.bstar(j);
        }
        long double s = G(i, i);
        for (Eigen::Index k = 0; k < i; ++k) s -= g.mu(i, k) * g.mu(i, k) * g.bstar(k);
        g.bstar(i) = s;
        g.mu(i, i) = 1;
    }
    return g;
}

// GSO of the basis columns from a Householder QR; stable when the entries are large.
inline Gso gso_from_basis(const MatrixLD& B) {
    const auto d = B.cols();
    const Eigen::HouseholderQR<MatrixLD> qr(B);
    const MatrixLD R = qr.matrixQR().topRows(d).template triangularView<Eigen::Upper>();
    Gso g{MatrixLD::Zero(d, d), VectorLD::Zero(d)};
    for (Eigen::Index i = 0; i < d; ++i) {
        g.bstar(i) = R(i, i) * R(i, i);
        g.mu(i, i) = 1;
        for (Eigen::Index j = 0; j < i; ++j) g.mu(i, j) = R(j, i) / R(j, j);
    }
    return g;
}

// LLL on the basis columns (delta = 0.99), floating point.
inline MatrixLD lll_reduce(MatrixLD B) {
    const auto d = B.cols();
    if (d <= 1) return B;
    Gso g = gso_from_basis(B);
    Eigen::Index k = 1;
    int guard = 0;
    while (k < d) {
        if (++guard > 1000000) throw std::runtime_error("LLL failed to converge");
        for (Eigen::Index j = k - 1; j >= 0; --j) {
            const long double q = std::round(g.mu(k, j));
            if (q == 0) continue;
            B.col(k) -= q * B.col(j);
            for (Eigen::Index i = 0; i <= j; ++i) g.mu(k, i) -= q * (i == j ? 1.0L : g.mu(j, i));
        }
        if (g.bstar(k) < (kLllDelta - g.mu(k, k - 1) * g.mu(k, k - 1)) * g.bstar(k - 1)) {
            B.col(k).swap(B.col(k - 1));
            g = gso_from_basis(B);
            k = std::max<Eigen::Index>(k - 1, 1);
        } else {
            ++k;
        }
    }
    return B;
}

// Visits integer coefficient vectors x with x^T G x <= R2 (as approximated by the GSO);
// visit(x, approx_norm2) may lower R2 through its return value.
template <class Visit>
void enumerate_gso(const Gso& g, long double R2, Visit&& visit) {
    const auto d = g.bstar.size();
    std::vector<long double> x(d, 0), partial(d + 1, 0);
    std::vector<std::int64_t> xi(d, 0);
    std::function<void(Eigen::Index)> rec = [&](Eigen::Index i) {
        long double c = 0;
        for (Eigen::Index j = i + 1; j < d; ++j) c -= g.mu(j, i) * x[j];
        const long double room = R2 - partial[i + 1];
        if (room < 0) return;
        const long double w = std::sqrt(room / g.bstar(i));
        const long double lo = std::ceil(c - w), hi = std::floor(c + w);
        for (long double v = lo; v <= hi; v += 1) {
            const long double diff = v - c;
            partial[i] = partial[i + 1] + diff * diff * g.bstar(i);
            if (partial[i] > R2) continue;
            x[i] = v;
            xi[i] = static_cast<std::int64_t>(v);
            if (i == 0) {
                R2 = visit(xi, partial[0], R2);
            } else {
                rec(i - 1);
            }
        }
        x[i] = 0;
        xi[i] = 0;
    };
    rec(d - 1);
}

struct ShortestVector {
    Eigen::VectorXd vector;
    double length = 0;
};

inline ShortestVector shortest_vector(const LatticeBasis& L) {
    if (L.dim() > 12) throw CapExceeded("shortest_vector: dimension above 12");
    const MatrixLD B = lll_reduce(L.columns);
    const Gso g = gso_from_basis(B);
    VectorLD best = B.col(0);
    long double best2 = best.squaredNorm();
    enumerate_gso(g, best2 * (1 + 1e-12L), [&](const std::vector<std::int64_t>& x, long double, long double R2) {
        VectorLD v = VectorLD::Zero(B.rows());
        bool zero = true;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (x[j] != 0) {
                zero = false;
                v += static_cast<long double>(x[j]) * B.col(j);
            }
        if (zero) return R2;
        const long double n2 = v.squaredNorm();
        if (n2 < best2) {
            best2 = n2;
            best = v;
            return n2 * (1 + 1e-12L);
        }
        return R2;
    });
    return {best.cast<double>(), static_cast<double>(std::sqrt(best2))};
}

// Nonzero lattice points of norm <= r; precondition: the count stays below 1e7.
inline std::int64_t count_points_in_ball(const LatticeBasis& L, double r) {
    if (L.dim() > 6) throw CapExceeded("count_points_in_ball: dimension above 6");
    if (r <= 0) return 0;
    const MatrixLD B = lll_reduce(L.columns);
    const Gso g = gso_from_basis(B);
    const long double r2 = static_cast<long double>(r) * r;
    std::int64_t count = 0;
    enumerate_gso(g, r2 * (1 + 1e-9L) + 1e-18L, [&](const std::vector<std::int64_t>& x, long double, long double R2) {
        VectorLD v = VectorLD::Zero(B.rows());
        bool zero = true;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (x[j] != 0) {
                zero = false;
                v += static_cast<long double>(x[j]) * B.col(j);
            }
        if (!zero && v.squaredNorm() <= r2) {
            if (++count > 10000000) throw CapExceeded("count_points_in_ball: more than 1e7 points");
        }
        return R2;
    });
    return count;
}

// Basis of sl_n over Z: E_ij (i != j, row-major) then H_i = E_ii - E_{i+1,i+1}.
struct SlBasisElement {
    Matrix<Rational> m;
    std::vector<int> weight;
    std::string name;
};

inline std::vector<SlBasisElement> sl_basis(int n) {
    std::vector<SlBasisElement> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            Matrix<Rational> m(n, n);
            m(i, j) = 1;
            std::vector<int> w(n, 0);
            w[i] += 1;
            w[j] -= 1;
            out.push_back({m, w, "E" + std::to_string(i + 1) + std::to_string(j + 1)});
        }
    for (int i = 0; i + 1 < n; ++i) out.push_back({diag_h(n, i), std::vector<int>(n, 0), "H" + std::to_string(i + 1)});
    return out;
}

struct WeightSpace {
    int l = 0;
    std::vector<int> weight;
    std::vector<std::vector<int>> basis;  // each an increasing l-subset of sl_basis indices
    std::size_t rank() const { return basis.size(); }
};

// Weights compared modulo the all-ones direction through n*chi - (sum chi)*1.
inline std::vector<int> canonical_weight(const std::vector<int>& chi) {
    const int n = static_cast<int>(chi.size());
    int s = 0;
    for (int c : chi) s += c;
    std::vector<int> out(n);
    for (int i = 0; i < n; ++i) out[i] = n * chi[i] - s;
    return out;
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

inline std::vector<WeightSpace> weight_spaces(int n, int l) {
    if (n < 2 || n > 4) throw CapExceeded("weight_spaces: n must lie in 2..4");
    const auto basis = sl_basis(n);
    const int D = static_cast<int>(basis.size());
    if (l < 1 || l > D) throw std::invalid_argument("weight_spaces: grade out of range");
    if (binomial(D, l) > 1e5) throw CapExceeded("weight_spaces: more than 1e5 wedge basis vectors");
    std::map<std::vector<int>, WeightSpace> groups;
    std::vector<int> idx(l);
    for (int i = 0; i < l; ++i) idx[i] = i;
    for (;;) {
        std::vector<int> chi(n, 0);
        for (int a : idx)
            for (int c = 0; c < n; ++c) chi[c] += basis[a].weight[c];
        auto& W = groups[canonical_weight(chi)];
        if (W.basis.empty()) {
            W.l = l;
            W.weight = chi;
        }
        W.basis.push_back(idx);
        int i = l - 1;
        while (i >= 0 && idx[i] == D - l + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < l; ++j) idx[j] = idx[j - 1] + 1;
    }
    std::vector<WeightSpace> out;
    for (auto& [key, W] : groups) out.push_back(std::move(W));
    return out;
}

inline Rational frobenius(const Matrix<Rational>& a, const Matrix<Rational>& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * b(i, j);
    return s;
}

// Gram matrix of Ad(g) applied to the sl_n basis, Frobenius inner product.
inline Matrix<Rational> adjoint_gram(const Matrix<Rational>& g) {
    const int n = static_cast<int>(g.rows());
    const auto basis = sl_basis(n);
    const Matrix<Rational> ginv = inverse(g);
    std::vector<Matrix<Rational>> img;
    for (const auto& b : basis) img.push_back(g * b.m * ginv);
    const int D = static_cast<int>(basis.size());
    Matrix<Rational> M(D, D);
    for (int a = 0; a < D; ++a)
        for (int b = a; b < D; ++b) M(a, b) = M(b, a) = frobenius(img[a], img[b]);
    return M;
}

// Gram matrix of the grade-l wedge images of W's basis (Cauchy-Binet).
inline Matrix<Rational> wedge_gram(const Matrix<Rational>& M, const WeightSpace& W) {
    const std::size_t r = W.rank();
    Matrix<Rational> G(r, r);
    for (std::size_t p = 0; p < r; ++p)
        for (std::size_t q = p; q < r; ++q) G(p, q) = G(q, p) = det_gauss(M.submatrix(W.basis[p], W.basis[q]));
    return G;
}

struct ExactGso {
    Matrix<Rational> mu;
    std::vector<Rational> bstar;
};

inline ExactGso exact_gso(const Matrix<Rational>& G) {
    const std::size_t d = G.rows();
    ExactGso g{Matrix<Rational>(d, d), std::vector<Rational>(d)};
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            Rational s = G(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= g.mu(j, k) * g.mu(i, k) * g.bstar[k];
            g.mu(i, j) = s / g.bstar[j];
        }
        Rational s = G(i, i);
        for (std::size_t k = 0; k < i; ++k) s -= g.mu(i, k) * g.mu(i, k) * g.bstar[k];
        g.bstar[i] = s;
        g.mu(i, i) = 1;
    }
    return g;
}

// Exact LLL acting on a positive definite rational Gram matrix.
inline Matrix<Rational> lll_gram_exact(Matrix<Rational> G) {
    const std::size_t d = G.rows();
    if (d <= 1) return G;
    const Rational delta(99, 100);
    std::size_t k = 1;
    ExactGso g = exact_gso(G);
    while (k < d) {
        for (std::size_t jj = k; jj-- > 0;) {
            const BigInt q = round_nearest(g.mu(k, jj));
            if (q == 0) continue;
            const Rational qr(q);
            // b_k <- b_k - q b_j
            const Rational gkk = G(k, k) - 2 * qr * G(k, jj) + qr * qr * G(jj, jj);
            for (std::size_t i = 0; i < d; ++i) {
                if (i == k) continue;
                G(k, i) -= qr * G(jj, i);
                G(i, k) = G(k, i);
            }
            G(k, k) = gkk;
            for (std::size_t i = 0; i <= jj; ++i) g.mu(k, i) -= qr * (i == jj ? Rational(1) : g.mu(jj, i));
        }
        if (g.bstar[k] < (delta - g.mu(k, k - 1) * g.mu(k, k - 1)) * g.bstar[k - 1]) {
            for (std::size_t i = 0; i < d; ++i) std::swap(G(k, i), G(k - 1, i));
            for (std::size_t i = 0; i < d; ++i) std::swap(G(i, k), G(i, k - 1));
            g = exact_gso(G);
            k = std::max<std::size_t>(k - 1, 1);
        } else {
            ++k;
        }
    }
    return G;
}

struct MinNorm {
    Rational norm_squared;
    double norm = 0;
    double log_norm = 0;
};

inline MinNorm make_min_norm(const Rational& n2) {
    return {n2, std::sqrt(to_double(n2)), 0.5 * log_rational(n2)};
}

// Exact minimum of x^T G x over nonzero integer x.
inline MinNorm gram_min_norm(const Matrix<Rational>& G0) {
    const std::size_t r = G0.rows();
    if (r == 1) return make_min_norm(G0(0, 0));
    const Matrix<Rational> G = lll_gram_exact(G0);
    const ExactGso eg = exact_gso(G);
    Gso g{MatrixLD::Zero(r, r), VectorLD::Zero(r)};
    for (std::size_t i = 0; i < r; ++i) {
        g.bstar(i) = to_long_double(eg.bstar[i]);
        for (std::size_t j = 0; j <= i; ++j) g.mu(i, j) = to_long_double(eg.mu(i, j));
    }
    Rational best = G(0, 0);
    for (std::size_t i = 1; i < r; ++i) best = std::min(best, G(i, i));
    const long double scale = to_long_double(best);
    enumerate_gso(g, scale * (1 + 1e-9L), [&](const std::vector<std::int64_t>& x, long double approx, long double R2) {
        bool zero = true;
        for (auto v : x) zero = zero && v == 0;
        if (zero) return R2;
        Rational n2 = 0;
        for (std::size_t p = 0; p < r; ++p) {
            if (!x[p]) continue;
            for (std::size_t q = 0; q < r; ++q)
                if (x[q]) n2 += Rational(x[p] * x[q]) * G(p, q);
        }
        if (n2 < best) {
            best = n2;
            return std::min(R2, approx * (1 + 1e-9L));
        }
        return R2;
    });
    return make_min_norm(best);
}

enum class MinNormMode { Exact, BasisOnly };

// min over nonzero v in the integer span of W of ||wedge^l Ad(g) v||.
inline MinNorm weight_min_norm(const Matrix<Rational>& g, int l, const WeightSpace& W,
                               MinNormMode mode = MinNormMode::Exact, std::size_t rank_cap = 12,
                               const Matrix<Rational>* precomputed_adjoint_gram = nullptr) {
    if (W.rank() > rank_cap) throw CapExceeded("weight_min_norm: rank above cap");
    if (W.l != l) throw std::invalid_argument("weight_min_norm: grade mismatch");
    const Matrix<Rational> M = precomputed_adjoint_gram ? *precomputed_adjoint_gram : adjoint_gram(g);
    const Matrix<Rational> G = wedge_gram(M, W);
    if (mode == MinNormMode::BasisOnly) {
        Rational best = G(0, 0);
        for (std::size_t i = 1; i < G.rows(); ++i) best = std::min(best, G(i, i));
        return make_min_norm(best);
    }
    return gram_min_norm(G);
}

} // namespace orbitkit
