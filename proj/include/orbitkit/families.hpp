#pragma once

#include "orbitkit/exterior.hpp"
#include "orbitkit/matrix.hpp"
#include "orbitkit/polynomial.hpp"
#include "orbitkit/rational.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbitkit {

struct DichotomyViolated : std::logic_error {
    using std::logic_error::logic_error;
};
struct Disconnected : std::logic_error {
    using std::logic_error::logic_error;
};
struct NontrivialScriptA : std::logic_error {
    using std::logic_error::logic_error;
};

using PolyMatrix = Matrix<RationalPolynomial>;

struct PolyFamily {
    std::string name;
    int n = 0;
    PolyMatrix entries;

    PolyFamily() = default;
    PolyFamily(std::string name_, PolyMatrix m) : name(std::move(name_)), n(static_cast<int>(m.rows())), entries(std::move(m)) {
        if (!entries.square() || n < 1 || n > kMaxDim) throw DimensionMismatch("family must be n x n with 1 <= n <= 8");
    }

    static PolyFamily identity(int n, std::string name = "identity") {
        PolyMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = RationalPolynomial(Rational(1));
        return PolyFamily(std::move(name), std::move(m));
    }

    const RationalPolynomial& operator()(int i, int j) const { return entries(i, j); }
    RationalPolynomial& operator()(int i, int j) { return entries(i, j); }

    bool is_unipotent_upper() const {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                const auto& p = entries(i, j);
                if (i == j ? p != RationalPolynomial(Rational(1)) : !p.is_zero()) return false;
            }
        return true;
    }

    bool is_constant() const {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (!entries(i, j).is_constant()) return false;
        return true;
    }

    Matrix<Rational> at(const Rational& k) const {
        return entries.map([&](const RationalPolynomial& p) { return p.eval(k); });
    }
};

enum class EntryClass { Zero, Constant, Diverges };

struct DivergencePattern {
    int n = 0;
    std::vector<EntryClass> cls;
    std::vector<Rational> constant;

    EntryClass operator()(int i, int j) const { return cls[i * n + j]; }
};

inline DivergencePattern divergence_pattern(const PolyFamily& F) {
    DivergencePattern P;
    P.n = F.n;
    P.cls.resize(F.n * F.n);
    P.constant.resize(F.n * F.n);
    for (int i = 0; i < F.n; ++i)
        for (int j = 0; j < F.n; ++j) {
            const auto& p = F(i, j);
            auto& c = P.cls[i * F.n + j];
            if (p.is_zero()) c = EntryClass::Zero;
            else if (p.degree() == 0) {
                c = EntryClass::Constant;
                P.constant[i * F.n + j] = p.constant_term();
            } else c = EntryClass::Diverges;
        }
    return P;
}

// Undirected graph on vertices 1..n; adjacency kept as 0-based bitmasks.
struct PatternGraph {
    int n = 0;
    std::vector<std::uint32_t> adj;

    explicit PatternGraph(int n_ = 0) : n(n_), adj(n_, 0) {}

    void add_edge(int i, int j) {
        if (i == j || i < 1 || j < 1 || i > n || j > n) throw std::invalid_argument("bad edge");
        adj[i - 1] |= 1u << (j - 1);
        adj[j - 1] |= 1u << (i - 1);
    }
    bool has_edge(int i, int j) const { return (adj[i - 1] >> (j - 1)) & 1u; }

    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j)
                if (has_edge(i, j)) out.emplace_back(i, j);
        return out;
    }

    // Components of the subgraph induced on `mask`, each a bitmask, ordered by smallest vertex.
    std::vector<std::uint32_t> component_masks(std::uint32_t mask) const {
        std::vector<std::uint32_t> comps;
        std::uint32_t left = mask;
        while (left) {
            std::uint32_t comp = left & (~left + 1);
            std::uint32_t frontier = comp;
            while (frontier) {
                int v = std::countr_zero(frontier);
                frontier &= frontier - 1;
                std::uint32_t fresh = adj[v] & mask & ~comp;
                comp |= fresh;
                frontier |= fresh;
            }
            comps.push_back(comp);
            left &= ~comp;
        }
        return comps;
    }
    std::uint32_t all_mask() const { return n ? (1u << n) - 1 : 0; }

    std::vector<std::vector<int>> components() const {
        std::vector<std::vector<int>> out;
        for (auto m : component_masks(all_mask())) out.push_back(MultiIndex(n, m).indices());
        return out;
    }
    bool connected() const { return component_masks(all_mask()).size() <= 1; }
};

inline PatternGraph graph_of(const DivergencePattern& P) {
    PatternGraph G(P.n);
    for (int i = 0; i < P.n; ++i)
        for (int j = i + 1; j < P.n; ++j) {
            switch (P(i, j)) {
            case EntryClass::Constant:
                throw DichotomyViolated("entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                        ") is a nonzero constant; run decompose_bounded first");
            case EntryClass::Diverges: G.add_edge(i + 1, j + 1); break;
            case EntryClass::Zero: break;
            }
        }
    return G;
}

inline PatternGraph graph_of(const PolyFamily& F) { return graph_of(divergence_pattern(F)); }

// S is UDS within the vertex set `within` iff every member's smaller neighbours (inside `within`) lie in S.
inline bool is_uds(const PatternGraph& G, std::uint32_t S, std::uint32_t within) {
    for (std::uint32_t rest = S; rest; rest &= rest - 1) {
        int v = std::countr_zero(rest);
        std::uint32_t lower = G.adj[v] & within & ((1u << v) - 1);
        if ((lower & ~S) != 0) return false;
    }
    return true;
}

inline bool is_uds(const PatternGraph& G, const MultiIndex& I) { return is_uds(G, I.mask(), G.all_mask()); }

inline std::vector<MultiIndex> uds_subsets(const PatternGraph& G) {
    if (G.n > 20) throw std::invalid_argument("uds_subsets: n > 20");
    std::vector<MultiIndex> out;
    const std::uint32_t all = G.all_mask();
    for (std::uint32_t S = 1; S <= all; ++S)
        if (is_uds(G, S, all)) out.emplace_back(G.n, S);
    return out;
}

namespace detail {

inline std::vector<std::uint32_t> proper_uds_within(const PatternGraph& G, std::uint32_t within) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t S = (within - 1) & within; S; S = (S - 1) & within)
        if (is_uds(G, S, within)) out.push_back(S);
    return out;
}

inline void certify_into(const PatternGraph& G, std::uint32_t within, std::vector<Rational>& x) {
    const int v1 = std::countr_zero(within);
    const std::uint32_t rest = within & ~(1u << v1);
    if (!rest) {
        x[v1] = 0;
        return;
    }
    const auto comps = G.component_masks(rest);
    std::optional<Rational> eps_max;
    for (auto c : comps) {
        certify_into(G, c, x);
        for (auto S : proper_uds_within(G, c)) {
            Rational s = 0;
            for (std::uint32_t m = S; m; m &= m - 1) s += x[std::countr_zero(m)];
            s /= std::popcount(S);
            if (!eps_max || s < *eps_max) eps_max = s;
        }
    }
    const Rational eps = eps_max ? Rational(*eps_max / 2) : Rational(1);
    for (std::uint32_t m = rest; m; m &= m - 1) x[std::countr_zero(m)] -= eps;
    x[v1] = eps * std::popcount(rest);
}

} // namespace detail

// Exact x with zero sum and positive sum over every proper nonempty UDS subset.
inline std::vector<Rational> uds_certificate(const PatternGraph& G) {
    if (G.n == 0 || !G.connected()) throw Disconnected("uds_certificate requires a connected graph");
    std::vector<Rational> x(G.n, Rational(0));
    detail::certify_into(G, G.all_mask(), x);
    return x;
}

inline bool verify_certificate(const PatternGraph& G, const std::vector<Rational>& x) {
    Rational total = 0;
    for (const auto& v : x) total += v;
    if (total != 0) return false;
    for (const auto& S : uds_subsets(G)) {
        if (S.is_full()) continue;
        Rational s = 0;
        for (int i : S.zero_based()) s += x[i];
        if (s <= 0) return false;
    }
    return true;
}

enum class Boundedness { Fixed, Diverges };

inline Boundedness check_uds_boundedness(const PolyFamily& F, const MultiIndex& I) {
    if (!F.is_unipotent_upper()) throw std::invalid_argument("check_uds_boundedness: family must be unipotent upper");
    graph_of(F);
    const auto w = wedge_action(F.entries, I);
    if (w.coords.size() == 1 && w.coords.begin()->first == I.mask() &&
        w.coords.begin()->second == RationalPolynomial(Rational(1)))
        return Boundedness::Fixed;
    return Boundedness::Diverges;
}

struct BoundedDecomposition {
    PolyFamily B;
    PolyFamily V;
};

// F = B V with B constant and V satisfying the dichotomy, built column by column.
inline BoundedDecomposition decompose_bounded(const PolyFamily& F) {
    if (!F.is_unipotent_upper()) throw std::invalid_argument("decompose_bounded: family must be unipotent upper");
    const int n = F.n;
    Matrix<Rational> B = Matrix<Rational>::identity(n);
    PolyMatrix V(n, n);
    for (int i = 0; i < n; ++i) V(i, i) = RationalPolynomial(Rational(1));
    for (int j = 1; j < n; ++j) {
        std::vector<int> idx(j);
        for (int i = 0; i < j; ++i) idx[i] = i;
        const Matrix<Rational> Binv = inverse(B.submatrix(idx, idx));
        std::vector<RationalPolynomial> x(j);
        for (int r = 0; r < j; ++r)
            for (int c = 0; c < j; ++c)
                if (Binv(r, c) != 0) x[r] += RationalPolynomial(Binv(r, c)) * F(c, j);
        std::vector<Rational> c0(j);
        for (int r = 0; r < j; ++r) {
            c0[r] = x[r].constant_term();
            V(r, j) = x[r] - RationalPolynomial(c0[r]);
        }
        for (int r = 0; r < j; ++r) {
            Rational s = 0;
            for (int c = 0; c < j; ++c) s += B(r, c) * c0[c];
            B(r, j) = s;
        }
    }
    PolyMatrix Bp = B.map([](const Rational& q) { return RationalPolynomial(q); });
    return {PolyFamily(F.name + ":bounded", std::move(Bp)), PolyFamily(F.name + ":dichotomy", std::move(V))};
}

struct IwasawaFactors {
    Eigen::MatrixXd K;
    Eigen::MatrixXd N;
    Eigen::MatrixXd A;
};

// g = K N A with K in SO(n), N unipotent upper, A positive diagonal.
inline IwasawaFactors iwasawa(const Eigen::MatrixXd& g) {
    if (g.rows() != g.cols()) throw DimensionMismatch("iwasawa: square matrix required");
    const double d = g.determinant();
    if (!(std::abs(d) > 1e-300)) throw SingularMatrix("iwasawa: singular input");
    if (d < 0) throw std::domain_error("iwasawa: determinant must be positive");
    const auto n = g.rows();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd Q = qr.householderQ();
    Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (R(i, i) < 0) {
            R.row(i) *= -1.0;
            Q.col(i) *= -1.0;
        }
    }
    IwasawaFactors f;
    f.K = Q;
    f.A = Eigen::MatrixXd::Zero(n, n);
    f.N = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        f.A(j, j) = R(j, j);
        for (Eigen::Index i = 0; i < j; ++i) f.N(i, j) = R(i, j) / R(j, j);
    }
    return f;
}

namespace detail {

// Rows scaled to primitive integer vectors after reduction to echelon form.
inline std::vector<RationalLieAVector> canonical_basis(const std::vector<std::vector<Rational>>& vecs, int n) {
    if (vecs.empty()) return {};
    Matrix<Rational> M(vecs.size(), n);
    for (std::size_t r = 0; r < vecs.size(); ++r)
        for (int c = 0; c < n; ++c) M(r, c) = vecs[r][c];
    const auto pivots = rref(M);
    std::vector<RationalLieAVector> out;
    for (std::size_t r = 0; r < pivots.size(); ++r) {
        BigInt l = 1;
        for (int c = 0; c < n; ++c) l = boost::multiprecision::lcm(l, BigInt(boost::multiprecision::denominator(M(r, c))));
        std::vector<BigInt> ints(n);
        BigInt g = 0;
        for (int c = 0; c < n; ++c) {
            Rational v = M(r, c) * Rational(l);
            ints[c] = boost::multiprecision::numerator(v);
            g = boost::multiprecision::gcd(g, ints[c]);
        }
        std::vector<Rational> row(n);
        for (int c = 0; c < n; ++c) row[c] = Rational(ints[c] / g);
        out.emplace_back(std::move(row));
    }
    return out;
}

} // namespace detail

// Trace-zero directions frozen by the family: constant on each graph component,
// optionally intersected with span(S_basis).
inline std::vector<RationalLieAVector> script_A(const DivergencePattern& P,
                                                const std::optional<std::vector<RationalLieAVector>>& S_basis = std::nullopt) {
    const PatternGraph G = graph_of(P);
    const int n = P.n;
    const auto comps = G.component_masks(G.all_mask());
    std::vector<std::vector<Rational>> vecs;
    if (!S_basis) {
        const std::uint32_t last = comps.back();
        const int last_size = std::popcount(last);
        for (std::size_t c = 0; c + 1 < comps.size(); ++c) {
            std::vector<Rational> v(n, Rational(0));
            const int sz = std::popcount(comps[c]);
            for (int i = 0; i < n; ++i) {
                if ((comps[c] >> i) & 1u) v[i] = last_size;
                if ((last >> i) & 1u) v[i] = -sz;
            }
            vecs.push_back(std::move(v));
        }
    } else {
        const auto& S = *S_basis;
        for (const auto& s : S)
            if (static_cast<int>(s.size()) != n) throw DimensionMismatch("script_A: S basis dimension");
        std::vector<std::vector<Rational>> rows;
        for (auto comp : comps) {
            const auto idx = MultiIndex(n, comp).zero_based();
            for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
                std::vector<Rational> row(S.size());
                for (std::size_t i = 0; i < S.size(); ++i) row[i] = S[i][idx[a]] - S[i][idx[a + 1]];
                rows.push_back(std::move(row));
            }
        }
        std::vector<std::vector<Rational>> coeffs;
        if (rows.empty()) {
            for (std::size_t i = 0; i < S.size(); ++i) {
                std::vector<Rational> e(S.size(), Rational(0));
                e[i] = 1;
                coeffs.push_back(std::move(e));
            }
        } else {
            Matrix<Rational> C(rows.size(), S.size());
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (std::size_t i = 0; i < S.size(); ++i) C(r, i) = rows[r][i];
            coeffs = nullspace(C);
        }
        for (const auto& c : coeffs) {
            std::vector<Rational> v(n, Rational(0));
            for (std::size_t i = 0; i < S.size(); ++i)
                for (int j = 0; j < n; ++j) v[j] += c[i] * S[i][j];
            vecs.push_back(std::move(v));
        }
    }
    return detail::canonical_basis(vecs, n);
}

struct LimitDescription {
    std::vector<std::vector<int>> components;
    std::vector<std::vector<int>> blocks;
    std::vector<RationalLieAVector> basisA;
    std::vector<int> blockSizes;
    int centerDim = 0;
    bool haar = false;
};

inline LimitDescription predict_limit(const DivergencePattern& P,
                                      const std::optional<std::vector<RationalLieAVector>>& S_basis = std::nullopt) {
    LimitDescription L;
    L.components = graph_of(P).components();
    L.basisA = script_A(P, S_basis);
    L.centerDim = static_cast<int>(L.basisA.size());
    std::map<std::vector<Rational>, std::vector<int>> groups;
    std::vector<std::vector<Rational>> order;
    for (int i = 0; i < P.n; ++i) {
        std::vector<Rational> key;
        for (const auto& b : L.basisA) key.push_back(b[i]);
        auto [it, fresh] = groups.try_emplace(key);
        if (fresh) order.push_back(key);
        it->second.push_back(i + 1);
    }
    for (const auto& key : order) {
        L.blocks.push_back(groups[key]);
        L.blockSizes.push_back(static_cast<int>(groups[key].size()));
    }
    L.haar = L.basisA.empty();
    return L;
}

// (I - g) is nilpotent for unipotent g, so the Neumann series terminates.
template <class T>
Matrix<T> unipotent_inverse(const Matrix<T>& g) {
    const std::size_t n = g.rows();
    const Matrix<T> I = Matrix<T>::identity(n);
    const Matrix<T> E = I - g;
    Matrix<T> term = I, sum = I;
    for (std::size_t m = 1; m < n; ++m) {
        term = term * E;
        sum = sum + term;
    }
    return sum;
}

inline Matrix<Rational> diag_h(int n, int i) {
    Matrix<Rational> H(n, n);
    H(i, i) = 1;
    H(i + 1, i + 1) = -1;
    return H;
}

inline PolyMatrix adjoint_poly(const PolyFamily& F, const Matrix<Rational>& Y) {
    const PolyMatrix Yp = Y.map([](const Rational& q) { return RationalPolynomial(q); });
    return F.entries * Yp * unipotent_inverse(F.entries);
}

// Limit of Ad(g(k)) Lie(A) in the Grassmannian, as a basis of leading-coefficient matrices.
inline std::vector<Matrix<Rational>> limit_subspace(const PolyFamily& F) {
    if (F.is_constant()) throw NontrivialScriptA("constant family: every direction is frozen");
    if (!F.is_unipotent_upper()) throw std::invalid_argument("limit_subspace: family must be unipotent upper");
    if (!script_A(divergence_pattern(F)).empty()) throw NontrivialScriptA("graph is disconnected; limit has a central direction");
    const int n = F.n;
    const int m = n - 1;
    const int len = n * n;
    std::vector<std::vector<RationalPolynomial>> vs;
    for (int i = 0; i < m; ++i) {
        const PolyMatrix Z = adjoint_poly(F, diag_h(n, i));
        std::vector<RationalPolynomial> v(len);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) v[r * n + c] = Z(r, c);
        vs.push_back(std::move(v));
    }
    auto degree = [](const std::vector<RationalPolynomial>& v) {
        int d = -1;
        for (const auto& p : v) d = std::max(d, p.degree());
        return d;
    };
    for (;;) {
        Matrix<Rational> L(len, vs.size());
        std::vector<int> deg(vs.size());
        for (std::size_t i = 0; i < vs.size(); ++i) {
            deg[i] = degree(vs[i]);
            for (int r = 0; r < len; ++r) L(r, i) = vs[i][r].coeff(deg[i]);
        }
        const auto null = nullspace(L);
        if (null.empty()) break;
        const auto& c = null.front();
        std::size_t star = vs.size();
        for (std::size_t i = 0; i < vs.size(); ++i)
            if (c[i] != 0 && (star == vs.size() || deg[i] > deg[star])) star = i;
        std::vector<RationalPolynomial> next(len);
        for (std::size_t i = 0; i < vs.size(); ++i) {
            if (c[i] == 0) continue;
            const auto shift = RationalPolynomial::monomial(c[i], deg[star] - deg[i]);
            for (int r = 0; r < len; ++r) next[r] += shift * vs[i][r];
        }
        if (degree(next) < 0) {
            vs.erase(vs.begin() + static_cast<std::ptrdiff_t>(star));
        } else {
            vs[star] = std::move(next);
        }
    }
    Matrix<Rational> lead(vs.size(), len);
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const int d = degree(vs[i]);
        for (int r = 0; r < len; ++r) lead(i, r) = vs[i][r].coeff(d);
    }
    const auto piv = rref(lead);
    std::vector<Matrix<Rational>> out;
    for (std::size_t i = 0; i < piv.size(); ++i) {
        Matrix<Rational> Z(n, n);
        for (int r = 0; r < len; ++r) Z(r / n, r % n) = lead(i, r);
        out.push_back(std::move(Z));
    }
    return out;
}

template <class T>
bool is_nilpotent(const Matrix<T>& Z) {
    Matrix<T> P = Z;
    for (std::size_t i = 1; i < Z.rows(); ++i) P = P * Z;
    return P == Matrix<T>(Z.rows(), Z.cols(), T(0));
}

} // namespace orbitkit
