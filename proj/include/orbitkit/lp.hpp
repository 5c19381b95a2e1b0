#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace orbitkit::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
    Status status = Status::Infeasible;
    double value = 0;
    std::vector<double> x;
};

// Dense two-phase simplex with Bland's rule for
//   maximize c.x  subject to  A x <= b,  x >= 0.
class Simplex {
public:
    Simplex(const std::vector<std::vector<double>>& A, const std::vector<double>& b, const std::vector<double>& c)
        : m_(b.size()), n_(c.size()), D_(m_ + 2, std::vector<long double>(n_ + 2, 0)), B_(m_), N_(n_ + 1) {
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < n_; ++j) D_[i][j] = A[i][j];
        for (std::size_t i = 0; i < m_; ++i) {
            B_[i] = static_cast<long>(n_ + i);
            D_[i][n_] = -1;
            D_[i][n_ + 1] = b[i];
        }
        for (std::size_t j = 0; j < n_; ++j) {
            N_[j] = static_cast<long>(j);
            D_[m_][j] = -c[j];
        }
        N_[n_] = -1;
        D_[m_ + 1][n_] = 1;
    }

    Result solve() {
        Result res;
        std::size_t r = 0;
        for (std::size_t i = 1; i < m_; ++i)
            if (D_[i][n_ + 1] < D_[r][n_ + 1]) r = i;
        if (m_ > 0 && D_[r][n_ + 1] < -kEps) {
            pivot(r, n_);
            if (!run(1) || D_[m_ + 1][n_ + 1] < -kEps) {
                res.status = Status::Infeasible;
                return res;
            }
            for (std::size_t i = 0; i < m_; ++i)
                if (B_[i] == -1) {
                    std::size_t s = 0;
                    for (std::size_t j = 1; j <= n_; ++j)
                        if (better(j, s, i)) s = j;
                    pivot(i, s);
                }
        }
        if (!run(2)) {
            res.status = Status::Unbounded;
            res.value = std::numeric_limits<double>::infinity();
            return res;
        }
        res.status = Status::Optimal;
        res.x.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (B_[i] >= 0 && B_[i] < static_cast<long>(n_)) res.x[B_[i]] = static_cast<double>(D_[i][n_ + 1]);
        res.value = static_cast<double>(D_[m_][n_ + 1]);
        return res;
    }

private:
    static constexpr long double kEps = 1e-11L;

    bool better(std::size_t j, std::size_t s, std::size_t i) const {
        return D_[i][j] < D_[i][s] || (D_[i][j] == D_[i][s] && N_[j] < N_[s]);
    }

    void pivot(std::size_t r, std::size_t s) {
        const long double inv = 1.0L / D_[r][s];
        for (std::size_t i = 0; i < m_ + 2; ++i) {
            if (i == r) continue;
            const long double f = D_[i][s] * inv;
            if (f == 0) continue;
            for (std::size_t j = 0; j < n_ + 2; ++j)
                if (j != s) D_[i][j] -= D_[r][j] * f;
            D_[i][s] = -f;
        }
        for (std::size_t j = 0; j < n_ + 2; ++j)
            if (j != s) D_[r][j] *= inv;
        D_[r][s] = inv;
        std::swap(B_[r], N_[s]);
    }

    bool run(int phase) {
        const std::size_t x = phase == 1 ? m_ + 1 : m_;
        for (;;) {
            std::size_t s = n_ + 1;
            for (std::size_t j = 0; j <= n_; ++j) {
                if (phase == 2 && N_[j] == -1) continue;
                if (s == n_ + 1 || D_[x][j] < D_[x][s] - kEps ||
                    (std::abs(D_[x][j] - D_[x][s]) <= kEps && N_[j] < N_[s]))
                    s = j;
            }
            if (D_[x][s] > -kEps) return true;
            std::size_t r = m_;
            for (std::size_t i = 0; i < m_; ++i) {
                if (D_[i][s] < kEps) continue;
                if (r == m_) {
                    r = i;
                    continue;
                }
                const long double lhs = D_[i][n_ + 1] / D_[i][s];
                const long double rhs = D_[r][n_ + 1] / D_[r][s];
                if (lhs < rhs - kEps || (std::abs(lhs - rhs) <= kEps && B_[i] < B_[r])) r = i;
            }
            if (r == m_) return false;
            pivot(r, s);
        }
    }

    std::size_t m_, n_;
    std::vector<std::vector<long double>> D_;
    std::vector<long> B_, N_;
};

// maximize c.x subject to A x <= b with x free (split into positive and negative parts).
inline Result maximize_free(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                            const std::vector<double>& c) {
    const std::size_t n = c.size();
    std::vector<std::vector<double>> A2(A.size(), std::vector<double>(2 * n));
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) {
            A2[i][j] = A[i][j];
            A2[i][n + j] = -A[i][j];
        }
    std::vector<double> c2(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
        c2[j] = c[j];
        c2[n + j] = -c[j];
    }
    Result r = Simplex(A2, b, c2).solve();
    if (r.status == Status::Optimal) {
        std::vector<double> x(n);
        for (std::size_t j = 0; j < n; ++j) x[j] = r.x[j] - r.x[n + j];
        r.x = std::move(x);
    }
    return r;
}

} // namespace orbitkit::lp
