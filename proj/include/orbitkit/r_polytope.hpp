#pragma once

#include "orbitkit/lattice.hpp"
#include "orbitkit/polytope.hpp"

#include <optional>
#include <utility>

namespace orbitkit {

inline std::string weight_label(int l, const std::vector<int>& chi) {
    std::string s = "l=" + std::to_string(l) + ";chi=(";
    for (std::size_t i = 0; i < chi.size(); ++i) s += (i ? "," : "") + std::to_string(chi[i]);
    return s + ")";
}

// R_{g,delta}: chi(t) >= ln(delta) - ln(min ||wedge^l Ad(g) v||) over each weight space, each grade l.
inline HPolytope r_polytope(const Matrix<Rational>& g, double delta, std::optional<std::pair<int, int>> l_range = std::nullopt,
                            MinNormMode mode = MinNormMode::Exact) {
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0,1)");
    const int n = static_cast<int>(g.rows());
    const int dimg = n * n - 1;
    if (!l_range) {
        if (n > 3) throw CapExceeded("r_polytope: n > 3 needs an explicit grade range");
        l_range = std::make_pair(1, dimg - 1);
    }
    const auto [l_lo, l_hi] = *l_range;
    if (l_lo < 1 || l_hi > dimg - 1 || l_lo > l_hi) throw std::invalid_argument("r_polytope: bad grade range");
    const Matrix<Rational> M = adjoint_gram(g);
    HPolytope H;
    H.n = n;
    for (int l = l_lo; l <= l_hi; ++l) {
        for (const auto& W : weight_spaces(n, l)) {
            const MinNorm mn = weight_min_norm(g, l, W, mode, 12, &M);
            std::vector<double> a(W.weight.begin(), W.weight.end());
            H.constraints.push_back({std::move(a), std::log(delta) - mn.log_norm, weight_label(l, W.weight)});
        }
    }
    return H;
}

} // namespace orbitkit
