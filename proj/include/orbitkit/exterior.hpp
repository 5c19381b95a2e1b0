#pragma once

#include "orbitkit/matrix.hpp"
#include "orbitkit/polynomial.hpp"
#include "orbitkit/rational.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace orbitkit {

inline constexpr int kMaxDim = 8;

// Nonempty subset of {1..n}, stored as a bitmask (bit i-1 <=> index i).
class MultiIndex {
public:
    MultiIndex() = default;
    MultiIndex(int n, std::uint32_t mask) : n_(n), mask_(mask) { validate(); }
    MultiIndex(int n, const std::vector<int>& indices) : n_(n), mask_(0) {
        int prev = 0;
        for (int i : indices) {
            if (i <= prev) throw std::invalid_argument("multi-index must be strictly increasing");
            if (i > n) throw std::invalid_argument("multi-index entry exceeds n");
            mask_ |= 1u << (i - 1);
            prev = i;
        }
        validate();
    }

    static MultiIndex full(int n) { return MultiIndex(n, (1u << n) - 1); }

    int n() const { return n_; }
    std::uint32_t mask() const { return mask_; }
    int size() const { return std::popcount(mask_); }
    bool contains(int i) const { return (mask_ >> (i - 1)) & 1u; }
    bool is_full() const { return mask_ == (1u << n_) - 1; }

    std::vector<int> indices() const {
        std::vector<int> out;
        for (int i = 1; i <= n_; ++i)
            if (contains(i)) out.push_back(i);
        return out;
    }
    std::vector<int> zero_based() const {
        std::vector<int> out;
        for (int i = 0; i < n_; ++i)
            if ((mask_ >> i) & 1u) out.push_back(i);
        return out;
    }

    std::string str() const {
        std::string s = "{";
        bool first = true;
        for (int i : indices()) {
            if (!first) s += ",";
            s += std::to_string(i);
            first = false;
        }
        return s + "}";
    }

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
        return a.n_ == b.n_ && a.mask_ == b.mask_;
    }
    friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
        return a.n_ != b.n_ ? a.n_ < b.n_ : a.mask_ < b.mask_;
    }

private:
    void validate() const {
        if (n_ < 1 || n_ > kMaxDim) throw std::invalid_argument("ambient dimension outside 1..8");
        if (mask_ == 0) throw std::invalid_argument("multi-index must be nonempty");
        if (mask_ >> n_) throw std::invalid_argument("multi-index entry exceeds n");
    }

    int n_ = 1;
    std::uint32_t mask_ = 1;
};

// All nonempty multi-indices of {1..n}, ordered by mask.
inline std::vector<MultiIndex> all_multi_indices(int n, bool include_full = true) {
    std::vector<MultiIndex> out;
    const std::uint32_t top = (1u << n) - 1;
    for (std::uint32_t m = 1; m <= top; ++m)
        if (include_full || m != top) out.emplace_back(n, m);
    return out;
}

inline std::vector<MultiIndex> multi_indices_of_size(int n, int l) {
    std::vector<MultiIndex> out;
    for (std::uint32_t m = 1; m < (1u << n); ++m)
        if (std::popcount(m) == l) out.emplace_back(n, m);
    return out;
}

template <class T>
struct WedgeVector {
    int n = 0;
    int l = 0;
    std::map<std::uint32_t, T> coords;

    T operator[](const MultiIndex& J) const {
        auto it = coords.find(J.mask());
        return it == coords.end() ? T(0) : it->second;
    }
};

template <class T>
struct LieAVectorT {
    std::vector<T> t;

    LieAVectorT() = default;
    explicit LieAVectorT(std::vector<T> v) : t(std::move(v)) {
        T s(0), scale(0);
        for (const auto& x : t) {
            s += x;
            if constexpr (std::is_floating_point_v<T>) scale = std::max(scale, std::abs(x));
        }
        if constexpr (std::is_floating_point_v<T>) {
            if (std::abs(s) > 1e-12 * std::max(T(1), scale))
                throw std::invalid_argument("Lie(A) vector must have zero trace");
        } else {
            if (s != T(0)) throw std::invalid_argument("Lie(A) vector must have zero trace");
        }
    }
    std::size_t size() const { return t.size(); }
    const T& operator[](std::size_t i) const { return t[i]; }
};

using LieAVector = LieAVectorT<double>;
using RationalLieAVector = LieAVectorT<Rational>;

template <class T>
struct is_polynomial : std::false_type {};
template <class T>
struct is_polynomial<Polynomial<T>> : std::true_type {};

template <class T>
T minor_det(const Matrix<T>& g, const std::vector<int>& rows, const std::vector<int>& cols) {
    if constexpr (is_polynomial<T>::value) return det_laplace(g.submatrix(rows, cols));
    else return det_gauss(g.submatrix(rows, cols));
}

// Coefficients of g e_I on every e_J with |J| = |I|: the minor g[J, I].
template <class T>
WedgeVector<T> wedge_action(const Matrix<T>& g, const MultiIndex& I) {
    const int n = static_cast<int>(g.rows());
    if (!g.square() || n != I.n()) throw DimensionMismatch("wedge_action: dimension mismatch");
    WedgeVector<T> w;
    w.n = n;
    w.l = I.size();
    const auto cols = I.zero_based();
    for (const auto& J : multi_indices_of_size(n, w.l)) {
        T c = minor_det(g, J.zero_based(), cols);
        if (c != T(0)) w.coords.emplace(J.mask(), std::move(c));
    }
    return w;
}

template <class T>
T wedge_norm_squared(const Matrix<T>& g, const MultiIndex& I) {
    T s(0);
    for (const auto& [mask, c] : wedge_action(g, I).coords) s += c * c;
    return s;
}

inline double wedge_norm(const Matrix<double>& g, const MultiIndex& I) {
    return std::sqrt(wedge_norm_squared(g, I));
}

inline double wedge_norm(const Matrix<Rational>& g, const MultiIndex& I) {
    return std::sqrt(to_double(wedge_norm_squared(g, I)));
}

// ln of the wedge norm computed from the exact squared norm; safe for huge entries.
inline double log_wedge_norm(const Matrix<Rational>& g, const MultiIndex& I) {
    return 0.5 * log_rational(wedge_norm_squared(g, I));
}

template <class T>
T omega(const MultiIndex& I, const LieAVectorT<T>& t) {
    if (static_cast<int>(t.size()) != I.n()) throw DimensionMismatch("omega: dimension mismatch");
    T s(0);
    for (int i : I.zero_based()) s += t[i];
    return s;
}

// Wedge-linear extension of g acting on an arbitrary grade-l vector.
template <class T>
WedgeVector<T> apply_wedge(const Matrix<T>& g, const WedgeVector<T>& v) {
    WedgeVector<T> out;
    out.n = v.n;
    out.l = v.l;
    for (const auto& [mask, c] : v.coords) {
        for (const auto& [jm, gc] : wedge_action(g, MultiIndex(v.n, mask)).coords) {
            T& slot = out.coords[jm];
            slot += c * gc;
        }
    }
    for (auto it = out.coords.begin(); it != out.coords.end();) {
        if (it->second == T(0)) it = out.coords.erase(it);
        else ++it;
    }
    return out;
}

} // namespace orbitkit
