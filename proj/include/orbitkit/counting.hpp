#pragma once

#include "orbitkit/families.hpp"
#include "orbitkit/lattice.hpp"
#include "orbitkit/polytope.hpp"
#include "orbitkit/stats.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <array>
#include <atomic>
#include <numbers>
#include <optional>

namespace orbitkit {

// Characteristic polynomial data p0(x) = prod (x - alpha_i) with distinct nonzero integer roots.
struct CharPolyData {
    std::vector<long long> alpha;

    CharPolyData() = default;
    explicit CharPolyData(std::vector<long long> roots) : alpha(std::move(roots)) {
        if (alpha.size() < 2) throw std::invalid_argument("need at least two roots");
        std::sort(alpha.begin(), alpha.end());
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            if (alpha[i] == 0) throw std::invalid_argument("roots must be nonzero");
            if (i && alpha[i] == alpha[i - 1]) throw std::invalid_argument("roots must be distinct");
        }
    }

    int n() const { return static_cast<int>(alpha.size()); }
    int m() const { return n() * (n() - 1) / 2; }

    Matrix<Rational> M() const {
        Matrix<Rational> out(n(), n());
        for (int i = 0; i < n(); ++i) out(i, i) = alpha[i];
        return out;
    }

    // q_i(x) = prod_{k <= i} (x - alpha_k), 1-based roots; q_0 = 1.
    Rational q(int i, const Rational& x) const {
        Rational r = 1;
        for (int k = 0; k < i; ++k) r *= x - alpha[k];
        return r;
    }

    RationalPolynomial char_poly() const {
        RationalPolynomial p = RationalPolynomial::monomial(1, 0);
        for (auto a : alpha) p = p * RationalPolynomial(std::vector<Rational>{Rational(-a), Rational(1)});
        return p;
    }

    // Elementary symmetric functions e_1..e_n.
    std::vector<long long> elementary() const {
        std::vector<long long> e(n() + 1, 0);
        e[0] = 1;
        for (auto a : alpha)
            for (int k = n(); k >= 1; --k) e[k] += e[k - 1] * a;
        return e;
    }

    Rational vandermonde_product() const {
        Rational r = 1;
        for (int i = 0; i < n(); ++i)
            for (int j = i + 1; j < n(); ++j) r *= Rational(std::abs(alpha[j] - alpha[i]));
        return r;
    }
};

inline Matrix<Rational> conj_by_unipotent(const CharPolyData& cp, const Matrix<Rational>& u) {
    if (static_cast<int>(u.rows()) != cp.n()) throw DimensionMismatch("conj_by_unipotent: size mismatch");
    return u * cp.M() * unipotent_inverse(u);
}

// Inverts x = u M u^{-1} by (alpha_j - alpha_i) u_ij = sum_{i<k<=j} x_ik u_kj.
template <class T>
Matrix<T> x_to_u(const CharPolyData& cp, const Matrix<T>& x) {
    const int n = cp.n();
    Matrix<T> u = Matrix<T>::identity(n);
    for (int gap = 1; gap < n; ++gap)
        for (int i = 0; i + gap < n; ++i) {
            const int j = i + gap;
            T s(0);
            for (int k = i + 1; k <= j; ++k) s += x(i, k) * u(k, j);
            u(i, j) = s / T(cp.alpha[j] - cp.alpha[i]);
        }
    return u;
}

inline Rational jacobian_factor(const CharPolyData& cp) { return Rational(1) / cp.vandermonde_product(); }

// |det| of the central-difference Jacobian of the strictly upper x-coordinates -> u-coordinates map.
inline double jacobian_fd(const CharPolyData& cp, const std::vector<double>& xs, double h = 1e-5) {
    const int n = cp.n(), m = cp.m();
    std::vector<std::pair<int, int>> pos;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pos.emplace_back(i, j);
    auto build = [&](const std::vector<double>& v) {
        Matrix<double> x(n, n);
        for (int i = 0; i < n; ++i) x(i, i) = static_cast<double>(cp.alpha[i]);
        for (int p = 0; p < m; ++p) x(pos[p].first, pos[p].second) = v[p];
        return x_to_u(cp, x);
    };
    Eigen::MatrixXd J(m, m);
    for (int c = 0; c < m; ++c) {
        auto lo = xs, hi = xs;
        lo[c] -= h;
        hi[c] += h;
        const auto ul = build(lo), uh = build(hi);
        for (int r = 0; r < m; ++r) J(r, c) = (uh(pos[r].first, pos[r].second) - ul(pos[r].first, pos[r].second)) / (2 * h);
    }
    return std::abs(J.determinant());
}

inline Rational c_det(const CharPolyData& cp, const MultiIndex& I) {
    const auto idx = I.indices();
    const int l = static_cast<int>(idx.size());
    Matrix<Rational> C(l, l);
    for (int k = 1; k <= l; ++k)
        for (int j = 0; j < l; ++j) {
            const Rational a(cp.alpha[idx[j] - 1]);
            C(k - 1, j) = cp.q(k - 1, a) / cp.q(idx[j] - 1, a);
        }
    return det_gauss(C);
}

inline Rational c_det_closed_form(const CharPolyData& cp, const MultiIndex& I) {
    const auto idx = I.indices();
    Rational r = 1;
    for (int i : idx) r /= cp.q(i - 1, Rational(cp.alpha[i - 1]));
    for (std::size_t p = 0; p < idx.size(); ++p)
        for (std::size_t q = p + 1; q < idx.size(); ++q) r *= Rational(cp.alpha[idx[q] - 1] - cp.alpha[idx[p] - 1]);
    return r;
}

// Coefficient of e_1 ^ ... ^ e_l in u e_I over its predicted leading term, with x_{p,p+1} = s
// and the remaining strictly upper x-coordinates equal to 1.
inline Rational leading_wedge_check(const CharPolyData& cp, const MultiIndex& I, const Rational& s) {
    const int n = cp.n();
    Matrix<Rational> x(n, n);
    for (int i = 0; i < n; ++i) {
        x(i, i) = cp.alpha[i];
        for (int j = i + 1; j < n; ++j) x(i, j) = j == i + 1 ? s : Rational(1);
    }
    const auto u = x_to_u(cp, x);
    const auto cols = I.zero_based();
    const int l = static_cast<int>(cols.size());
    std::vector<int> rows(l);
    std::iota(rows.begin(), rows.end(), 0);
    const Rational coeff = det_gauss(u.submatrix(rows, cols));
    int exponent = 0;
    for (int j = 0; j < l; ++j) exponent += cols[j] - j;
    Rational lead = c_det(cp, I);
    for (int e = 0; e < exponent; ++e) lead *= s;
    return coeff / lead;
}

inline double unit_ball_volume(int m) { return std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0 + 1); }

// Leading-order Haar volume of N(T) = {u in N : ||u M u^{-1}|| <= T}.
inline double nT_volume(const CharPolyData& cp, double T) {
    if (!(T > 0)) throw std::invalid_argument("T must be positive");
    return unit_ball_volume(cp.m()) * std::pow(T, cp.m()) / to_double(cp.vandermonde_product());
}

// Exact volume: the x-coordinates fill a ball of radius sqrt(T^2 - sum alpha^2).
inline double nT_volume_exact(const CharPolyData& cp, double T) {
    if (!(T > 0)) throw std::invalid_argument("T must be positive");
    double r2 = T * T;
    for (auto a : cp.alpha) r2 -= static_cast<double>(a) * a;
    if (r2 <= 0) return 0;
    return unit_ball_volume(cp.m()) * std::pow(r2, cp.m() / 2.0) / to_double(cp.vandermonde_product());
}

// Monte Carlo volume of N(T) sampled directly in u-coordinates.
inline Estimate mc_nT_volume(const CharPolyData& cp, double T, std::size_t samples, std::uint64_t seed, unsigned threads = 1) {
    const int n = cp.n();
    double r2 = T * T;
    for (auto a : cp.alpha) r2 -= static_cast<double>(a) * a;
    if (r2 <= 0) return {0, 0};
    const double rho = std::sqrt(r2);
    // bounding box for u from |x_ij| <= rho through the triangular recursion
    Matrix<double> bound = Matrix<double>::identity(n);
    for (int gap = 1; gap < n; ++gap)
        for (int i = 0; i + gap < n; ++i) {
            const int j = i + gap;
            double s = 0;
            for (int k = i + 1; k <= j; ++k) s += rho * bound(k, j);
            bound(i, j) = s / std::abs(static_cast<double>(cp.alpha[j] - cp.alpha[i]));
        }
    double box = 1;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) box *= 2 * bound(i, j);
    Matrix<double> M(n, n);
    for (int i = 0; i < n; ++i) M(i, i) = static_cast<double>(cp.alpha[i]);
    std::vector<char> hit(samples);
    parallel_for(samples, threads, [&](std::size_t s) {
        Substream rng(seed, 0x6e54ULL, s);
        Matrix<double> u = Matrix<double>::identity(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) u(i, j) = rng.uniform(-bound(i, j), bound(i, j));
        const Matrix<double> x = u * M * unipotent_inverse(u);
        double norm2 = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) norm2 += x(i, j) * x(i, j);
        hit[s] = norm2 <= T * T;
    });
    const double p = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / samples;
    return {box * p, box * std::sqrt(p * (1 - p) / samples)};
}

// Haar volume of N(T) minus N(eps,T) = {|x_{i,i+1}| >= eps T for all i}, sampled in x-coordinates.
inline Estimate nT_eps_deficit(const CharPolyData& cp, double T, double eps, std::size_t samples, std::uint64_t seed,
                               unsigned threads = 1) {
    const int n = cp.n(), m = cp.m();
    const double total = nT_volume_exact(cp, T);
    if (total == 0) return {0, 0};
    double r2 = T * T;
    for (auto a : cp.alpha) r2 -= static_cast<double>(a) * a;
    const double rho = std::sqrt(r2);
    std::vector<int> super;  // positions of x_{i,i+1} in row-major strictly upper order
    int p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++p)
            if (j == i + 1) super.push_back(p);
    std::vector<char> miss(samples);
    parallel_for(samples, threads, [&](std::size_t s) {
        Substream rng(seed, 0x657073ULL, s);
        std::vector<double> v(m);
        double norm = 0;
        for (auto& c : v) {
            c = rng.normal();
            norm += c * c;
        }
        const double radius = rho * std::pow(rng.uniform(), 1.0 / m) / std::sqrt(norm);
        bool out = false;
        for (int q : super) out = out || std::abs(v[q] * radius) < eps * T;
        miss[s] = out;
    });
    const double f = static_cast<double>(std::count(miss.begin(), miss.end(), 1)) / samples;
    return {total * f, total * std::sqrt(f * (1 - f) / samples)};
}

// {t : sum t = 0, sum_j t_{i_j} >= sum_j (j - i_j)} over proper nonempty I.
inline HPolytope c0_polytope(int n) {
    if (n < 2 || n > 5) throw std::invalid_argument("c0_polytope: n must lie in 2..5");
    HPolytope H;
    H.n = n;
    for (const auto& I : all_multi_indices(n, false)) {
        const auto idx = I.indices();
        std::vector<double> a(n, 0.0);
        double b = 0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            a[idx[j] - 1] = 1;
            b += static_cast<double>(j + 1) - idx[j];
        }
        H.constraints.push_back({std::move(a), b, I.str()});
    }
    return H;
}

inline double c0_volume(int n, Measure measure = Measure::Hausdorff) { return volume(vertices(c0_polytope(n)), measure); }

// Order of the centralizer of M_alpha in SL(n,Z): diagonal sign matrices of determinant one.
inline std::int64_t stabilizer_order(const CharPolyData& cp) {
    if (cp.n() > 4) throw std::invalid_argument("stabilizer_order: n must be at most 4");
    return std::int64_t{1} << (cp.n() - 1);
}

// Sign vectors with product one that are values of an integer polynomial at the roots.
inline std::int64_t ring_sign_units(const CharPolyData& cp) {
    const int n = cp.n();
    if (n > 4) throw std::invalid_argument("ring_sign_units: n must be at most 4");
    std::int64_t count = 0;
    for (int mask = 0; mask < (1 << n); ++mask) {
        if (__builtin_popcount(mask) % 2) continue;
        std::vector<Rational> dd(n);
        for (int i = 0; i < n; ++i) dd[i] = (mask >> i) & 1 ? -1 : 1;
        bool integral = true;
        for (int level = 1; level < n && integral; ++level)
            for (int i = n - 1; i >= level; --i) {
                dd[i] = (dd[i] - dd[i - 1]) / Rational(cp.alpha[i] - cp.alpha[i - level]);
                if (i == level && denominator(dd[i]) != 1) integral = false;
            }
        if (integral) ++count;
    }
    return count;
}

inline double predicted_count(const CharPolyData& cp, double T, double cX, Measure measure = Measure::Hausdorff) {
    if (!(cX > 0)) throw std::invalid_argument("cX must be positive");
    const int n = cp.n();
    return c0_volume(n, measure) * unit_ball_volume(cp.m()) / (static_cast<double>(stabilizer_order(cp)) * cX * to_double(cp.vandermonde_product())) *
           std::pow(T, cp.m()) * std::pow(std::log(T), n - 1);
}

// Measure du dt of the SL(2,Z) fundamental domain in g = k n(u) a(t) coordinates, where the
// point g^{-1} i of the upper half plane is x + iy with y = e^{-2t} and x = -u y.
inline double fd_nA_measure() {
    boost::math::quadrature::exp_sinh<double> upper;
    boost::math::quadrature::tanh_sinh<double> finite;
    const double above = upper.integrate([](double s) { return std::exp(-2 * s); });  // t in (-inf, 0]
    const double t1 = std::log(4.0 / 3.0) / 4;                                          // y = sqrt(3)/2
    const double below = finite.integrate(
        [](double t) {
            const double y = std::exp(-2 * t);
            return 2 * (0.5 - std::sqrt(std::max(0.0, 1 - y * y))) / y;
        },
        0.0, t1);
    return above + below;
}

// Hyperbolic area of the standard fundamental domain by nested quadrature.
inline double hyperbolic_fd_area() {
    boost::math::quadrature::exp_sinh<double> upper;
    boost::math::quadrature::tanh_sinh<double> finite;
    return finite.integrate(
        [&](double x) {
            const double y0 = std::sqrt(1 - x * x);
            return upper.integrate([](double y) { return 1 / (y * y); }, y0, std::numeric_limits<double>::infinity());
        },
        -0.5, 0.5);
}

// Volume of SL(2,R)/SL(2,Z): the K fibre is K/{+-1} (mass 1/2) and Lie(A) carries the factor ||diag(1,-1)|| = sqrt 2.
inline double cx_sl2() { return std::sqrt(2.0) * 0.5 * fd_nA_measure(); }

namespace detail {

inline long long isqrt_floor(long long v) {
    if (v < 0) return -1;
    long long r = static_cast<long long>(std::sqrt(static_cast<double>(v)));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
}

inline long long floor_square(double T) { return static_cast<long long>(std::floor(T * T + 1e-9)); }

inline std::int64_t count_vz2(const CharPolyData& cp, double T, unsigned threads) {
    const auto e = cp.elementary();
    const long long tr = e[1], det = e[2], T2 = floor_square(T);
    const long long B = isqrt_floor(T2);
    std::vector<std::int64_t> part(2 * B + 1, 0);
    parallel_for(part.size(), threads, [&](std::size_t slot) {
        const long long a = static_cast<long long>(slot) - B, d = tr - a;
        const long long r = T2 - a * a - d * d;
        if (r < 0) return;
        const long long m = a * d - det;  // = b c
        std::int64_t c = 0;
        if (m == 0) {
            c = 2 * (2 * isqrt_floor(r) + 1) - 1;
        } else {
            const long long am = std::abs(m);
            for (long long b = 1; b * b <= am; ++b) {
                if (am % b) continue;
                const long long o = am / b;
                // (b, m/b), (-b, -m/b), and the swapped pair when b != o
                if (b * b + o * o <= r) c += b == o ? 2 : 4;
            }
        }
        part[slot] = c;
    });
    std::int64_t total = 0;
    for (auto c : part) total += c;
    return total;
}

inline std::int64_t count_vz3(const CharPolyData& cp, double T, unsigned threads) {
    const auto e = cp.elementary();
    const long long tr = e[1], e2 = e[2], e3 = e[3], T2 = floor_square(T);
    const long long B = isqrt_floor(T2);
    std::vector<std::int64_t> part(2 * B + 1, 0);
    parallel_for(part.size(), threads, [&](std::size_t slot) {
        const long long d1 = static_cast<long long>(slot) - B;
        std::int64_t count = 0;
        for (long long d2 = -B; d2 <= B; ++d2) {
            const long long d3 = tr - d1 - d2;
            const long long r0 = T2 - d1 * d1 - d2 * d2 - d3 * d3;
            if (r0 < 0) continue;
            const long long b12 = isqrt_floor(r0);
            for (long long a12 = -b12; a12 <= b12; ++a12) {
                const long long r1 = r0 - a12 * a12;
                const long long b21 = isqrt_floor(r1);
                for (long long a21 = -b21; a21 <= b21; ++a21) {
                    const long long r2 = r1 - a21 * a21;
                    const long long detB = d1 * d2 - a12 * a21, trB = d1 + d2;
                    // x = (a13, a23), y = (a31, a32): y.x = s1 and y^T adj(B) x = s2
                    const long long s1 = detB + d3 * trB - e2;
                    const long long s2 = d3 * detB - e3;
                    const long long bx1 = isqrt_floor(r2);
                    for (long long x1 = -bx1; x1 <= bx1; ++x1) {
                        const long long r3 = r2 - x1 * x1;
                        const long long bx2 = isqrt_floor(r3);
                        for (long long x2 = -bx2; x2 <= bx2; ++x2) {
                            const long long r4 = r3 - x2 * x2;
                            const long long c1 = d2 * x1 - a12 * x2, c2 = -a21 * x1 + d1 * x2;
                            const long long q = x1 * c2 - x2 * c1;
                            if (q != 0) {
                                const long long n1 = s1 * c2 - s2 * x2, n2 = -s1 * c1 + s2 * x1;
                                if (n1 % q || n2 % q) continue;
                                const long long y1 = n1 / q, y2 = n2 / q;
                                if (y1 * y1 + y2 * y2 <= r4) ++count;
                            } else {
                                const long long by1 = isqrt_floor(r4);
                                for (long long y1 = -by1; y1 <= by1; ++y1) {
                                    const long long by2 = isqrt_floor(r4 - y1 * y1);
                                    for (long long y2 = -by2; y2 <= by2; ++y2)
                                        if (x1 * y1 + x2 * y2 == s1 && y1 * c1 + y2 * c2 == s2) ++count;
                                }
                            }
                        }
                    }
                }
            }
        }
        part[slot] = count;
    });
    std::int64_t total = 0;
    for (auto c : part) total += c;
    return total;
}

inline bool has_char_poly(const std::vector<long long>& M, int n, const std::vector<long long>& e) {
    if (n == 2) return M[0] + M[3] == e[1] && M[0] * M[3] - M[1] * M[2] == e[2];
    const long long tr = M[0] + M[4] + M[8];
    const long long m2 = (M[0] * M[4] - M[1] * M[3]) + (M[0] * M[8] - M[2] * M[6]) + (M[4] * M[8] - M[5] * M[7]);
    const long long d = M[0] * (M[4] * M[8] - M[5] * M[7]) - M[1] * (M[3] * M[8] - M[5] * M[6]) + M[2] * (M[3] * M[7] - M[4] * M[6]);
    return tr == e[1] && m2 == e[2] && d == e[3];
}

} // namespace detail

// |V(Z) n B_T|: integer matrices with characteristic polynomial p0 and Euclidean norm <= T.
inline std::int64_t enumerate_VZ(const CharPolyData& cp, double T, unsigned threads = 1) {
    if (!(T >= 0)) throw std::invalid_argument("T must be nonnegative");
    if (cp.n() == 2) {
        if (T > 5000) throw CapExceeded("enumerate_VZ: T above 5000 for n = 2");
        return detail::count_vz2(cp, T, threads);
    }
    if (cp.n() == 3) {
        if (T > 150) throw CapExceeded("enumerate_VZ: T above 150 for n = 3");
        return detail::count_vz3(cp, T, threads);
    }
    throw std::invalid_argument("enumerate_VZ: n must be 2 or 3");
}

// Exhaustive search over all integer matrices of norm <= T; each M is tested through P M P^T,
// P a signed permutation matrix (identity by default). Returns the matched matrices.
inline std::vector<std::vector<long long>> list_VZ_naive(const CharPolyData& cp, double T,
                                                         std::optional<Matrix<long long>> P = std::nullopt) {
    const int n = cp.n();
    if (n != 2 && n != 3) throw std::invalid_argument("list_VZ_naive: n must be 2 or 3");
    if (T > (n == 2 ? 60 : 6)) throw CapExceeded("list_VZ_naive: T too large for exhaustive search");
    const auto e = cp.elementary();
    const long long T2 = detail::floor_square(T);
    const int N = n * n;
    std::vector<long long> M(N, 0);
    std::vector<std::vector<long long>> out;
    std::function<void(int, long long)> rec = [&](int pos, long long room) {
        if (pos == N) {
            std::vector<long long> X = M;
            if (P) {
                X.assign(N, 0);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        long long s = 0;
                        for (int a = 0; a < n; ++a)
                            for (int b = 0; b < n; ++b) s += (*P)(i, a) * M[a * n + b] * (*P)(j, b);
                        X[i * n + j] = s;
                    }
            }
            if (detail::has_char_poly(X, n, e)) out.push_back(M);
            return;
        }
        const long long b = detail::isqrt_floor(room);
        for (long long v = -b; v <= b; ++v) {
            M[pos] = v;
            rec(pos + 1, room - v * v);
        }
        M[pos] = 0;
    };
    rec(0, T2);
    return out;
}

struct CountReport {
    std::vector<long long> roots;
    std::vector<double> T;
    std::vector<std::int64_t> counts;
    std::vector<double> predicted;  // empty when no cX is supplied
    std::vector<double> ratio;      // predicted / actual
    LinearFit law;                  // count / T^m against ln^{n-1} T
    LinearFit loglog;               // ln count against ln T
};

inline CountReport count_report(const CharPolyData& cp, const std::vector<double>& grid, std::optional<double> cX,
                                unsigned threads = 1) {
    CountReport r;
    r.roots = cp.alpha;
    r.T = grid;
    std::vector<double> lx, ly, gx, gy;
    for (double T : grid) {
        const auto c = enumerate_VZ(cp, T, threads);
        if (!r.counts.empty() && c < r.counts.back()) throw std::logic_error("count decreased along an increasing grid");
        r.counts.push_back(c);
        if (cX) {
            const double p = predicted_count(cp, T, *cX);
            r.predicted.push_back(p);
            r.ratio.push_back(c ? p / static_cast<double>(c) : std::numeric_limits<double>::quiet_NaN());
        }
        if (c > 0 && T > 1) {
            lx.push_back(std::pow(std::log(T), cp.n() - 1));
            ly.push_back(static_cast<double>(c) / std::pow(T, cp.m()));
            gx.push_back(std::log(T));
            gy.push_back(std::log(static_cast<double>(c)));
        }
    }
    if (lx.size() >= 2) {
        r.law = fit_line(lx, ly);
        r.loglog = fit_line(gx, gy);
    }
    return r;
}

} // namespace orbitkit
