#pragma once

#include "orbitkit/exterior.hpp"
#include "orbitkit/lp.hpp"
#include "orbitkit/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbitkit {

struct UnboundedPolytope : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyPolytope : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kFeasTol = 1e-9;
inline constexpr double kMergeTol = 1e-9;

enum class Measure { Hausdorff, Coordinate };

// a . t >= b on the hyperplane sum(t) = 0.
struct Constraint {
    std::vector<double> a;
    double b = 0;
    std::string label;
};

struct HPolytope {
    int n = 0;
    std::vector<Constraint> constraints;

    bool contains(const std::vector<double>& t, double tol = kFeasTol) const {
        for (const auto& c : constraints) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += c.a[i] * t[i];
            if (s < c.b - tol * std::max(1.0, std::abs(c.b))) return false;
        }
        return true;
    }
};

// Orthonormal basis (n x (n-1)) of the trace-zero hyperplane; columns are Helmert contrasts.
inline Eigen::MatrixXd trace_zero_chart(int n) {
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n - 1);
    for (int j = 0; j < n - 1; ++j) {
        const double s = std::sqrt(static_cast<double>((j + 1) * (j + 2)));
        for (int i = 0; i <= j; ++i) E(i, j) = 1.0 / s;
        E(j + 1, j) = -(j + 1) / s;
    }
    return E;
}

// Builds an HPolytope from constraints written in the orthonormal chart coordinates.
inline HPolytope from_chart(int n, const std::vector<std::vector<double>>& A, const std::vector<double>& b) {
    const Eigen::MatrixXd E = trace_zero_chart(n);
    HPolytope H;
    H.n = n;
    for (std::size_t i = 0; i < A.size(); ++i) {
        Eigen::VectorXd ac = Eigen::Map<const Eigen::VectorXd>(A[i].data(), n - 1);
        Eigen::VectorXd a = E * ac;
        H.constraints.push_back({std::vector<double>(a.data(), a.data() + n), b[i], "c" + std::to_string(i)});
    }
    return H;
}

namespace detail {

struct ChartForm {
    int n = 0, d = 0;
    Eigen::MatrixXd E;
    std::vector<Eigen::VectorXd> a;  // unit normals in the chart
    std::vector<double> b;
    std::vector<std::string> labels;
    bool infeasible = false;
};

inline ChartForm to_chart(const HPolytope& H) {
    ChartForm C;
    C.n = H.n;
    C.d = H.n - 1;
    C.E = trace_zero_chart(H.n);
    for (const auto& con : H.constraints) {
        Eigen::VectorXd raw = Eigen::Map<const Eigen::VectorXd>(con.a.data(), H.n);
        Eigen::VectorXd ac = C.E.transpose() * raw;
        const double norm = ac.norm();
        if (norm <= 1e-12 * std::max(1.0, raw.norm())) {
            if (con.b > kFeasTol) C.infeasible = true;
            continue;
        }
        ac /= norm;
        const double b = con.b / norm;
        bool merged = false;
        for (std::size_t i = 0; i < C.a.size(); ++i) {
            if ((C.a[i] - ac).norm() <= 1e-10) {
                if (b > C.b[i]) {
                    C.b[i] = b;
                    C.labels[i] = con.label;
                }
                merged = true;
                break;
            }
        }
        if (!merged) {
            C.a.push_back(ac);
            C.b.push_back(b);
            C.labels.push_back(con.label);
        }
    }
    return C;
}

inline int affine_rank(const std::vector<Eigen::VectorXd>& pts, const std::vector<int>& idx, double scale) {
    if (idx.size() <= 1) return 0;
    Eigen::MatrixXd D(pts[idx[0]].size(), idx.size() - 1);
    for (std::size_t k = 1; k < idx.size(); ++k) D.col(k - 1) = pts[idx[k]] - pts[idx[0]];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
    qr.setThreshold(1e-9 * std::max(1.0, scale) / std::max(1.0, D.norm()));
    return static_cast<int>(qr.rank());
}

inline Eigen::MatrixXd affine_basis(const std::vector<Eigen::VectorXd>& pts, const std::vector<int>& idx, int rank) {
    const auto dim = pts[idx[0]].size();
    if (rank == 0) return Eigen::MatrixXd(dim, 0);
    Eigen::MatrixXd D(dim, idx.size() - 1);
    for (std::size_t k = 1; k < idx.size(); ++k) D.col(k - 1) = pts[idx[k]] - pts[idx[0]];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
    Eigen::MatrixXd Q = qr.householderQ();
    return Q.leftCols(rank);
}

} // namespace detail

// Vertex description in the orthonormal chart plus the lifted Lie(A) vertices.
struct VPolytope {
    int n = 0;
    int dim = 0;  // affine dimension of the vertex set
    std::vector<LieAVector> vertices;
    std::vector<std::vector<int>> incidence;  // tight constraint ids per vertex
    std::vector<std::vector<int>> facets;     // vertex ids per facet
    std::vector<int> facet_constraint;        // constraint id per facet

    detail::ChartForm chart;
    std::vector<Eigen::VectorXd> y;
    double scale = 1;
};

namespace detail {

inline bool chart_feasible(const ChartForm& C, const Eigen::VectorXd& y, double tol = kFeasTol) {
    for (std::size_t i = 0; i < C.a.size(); ++i)
        if (C.a[i].dot(y) < C.b[i] - tol * std::max(1.0, std::abs(C.b[i]))) return false;
    return true;
}

// Feasibility and boundedness via LPs over each coordinate direction.
inline void check_bounded(const ChartForm& C) {
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (std::size_t i = 0; i < C.a.size(); ++i) {
        std::vector<double> row(C.d);
        for (int j = 0; j < C.d; ++j) row[j] = -C.a[i](j);
        A.push_back(std::move(row));
        b.push_back(-C.b[i]);
    }
    for (int j = 0; j < C.d; ++j)
        for (double sgn : {1.0, -1.0}) {
            std::vector<double> c(C.d, 0.0);
            c[j] = sgn;
            const auto r = lp::maximize_free(A, b, c);
            if (r.status == lp::Status::Infeasible) throw EmptyPolytope("polytope is empty");
            if (r.status == lp::Status::Unbounded) throw UnboundedPolytope("polytope is unbounded");
        }
}

template <class F>
void for_each_subset(int m, int d, F&& f) {
    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    if (d > m) return;
    for (;;) {
        f(idx);
        int i = d - 1;
        while (i >= 0 && idx[i] == m - d + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (int j = i + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
    }
}

} // namespace detail

inline VPolytope vertices(const HPolytope& H) {
    if (H.n < 2 || H.n > 7) throw std::invalid_argument("vertices: n must lie in 2..7");
    VPolytope V;
    V.n = H.n;
    V.chart = detail::to_chart(H);
    const auto& C = V.chart;
    if (C.infeasible) throw EmptyPolytope("polytope is empty");
    if (C.a.empty()) throw UnboundedPolytope("polytope is unbounded");
    detail::check_bounded(C);
    const int d = C.d;
    const int m = static_cast<int>(C.a.size());
    for (double bi : C.b) V.scale = std::max(V.scale, std::abs(bi));
    detail::for_each_subset(m, d, [&](const std::vector<int>& S) {
        Eigen::MatrixXd A(d, d);
        Eigen::VectorXd rhs(d);
        for (int r = 0; r < d; ++r) {
            A.row(r) = C.a[S[r]].transpose();
            rhs(r) = C.b[S[r]];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        lu.setThreshold(1e-10);
        if (!lu.isInvertible()) return;
        Eigen::VectorXd y = lu.solve(rhs);
        if (!detail::chart_feasible(C, y)) return;
        for (const auto& w : V.y)
            if ((w - y).norm() <= kMergeTol * std::max(1.0, w.norm())) return;
        V.y.push_back(y);
    });
    if (V.y.empty()) throw EmptyPolytope("no vertices found");
    for (const auto& y : V.y) {
        std::vector<int> tight;
        for (int i = 0; i < m; ++i)
            if (std::abs(C.a[i].dot(y) - C.b[i]) <= 1e-8 * std::max({1.0, std::abs(C.b[i]), y.norm()})) tight.push_back(i);
        V.incidence.push_back(std::move(tight));
        Eigen::VectorXd t = C.E * y;
        std::vector<double> tv(t.data(), t.data() + V.n);
        double s = 0;
        for (double x : tv) s += x;
        for (double& x : tv) x -= s / V.n;
        V.vertices.emplace_back(std::move(tv));
    }
    std::vector<int> all(V.y.size());
    std::iota(all.begin(), all.end(), 0);
    V.dim = detail::affine_rank(V.y, all, V.scale);
    if (V.dim == d) {
        std::map<std::vector<int>, int> seen;
        for (int i = 0; i < m; ++i) {
            std::vector<int> sub;
            for (std::size_t v = 0; v < V.y.size(); ++v)
                if (std::binary_search(V.incidence[v].begin(), V.incidence[v].end(), i)) sub.push_back(static_cast<int>(v));
            if (static_cast<int>(sub.size()) < d || seen.count(sub)) continue;
            if (detail::affine_rank(V.y, sub, V.scale) != d - 1) continue;
            seen[sub] = i;
            V.facets.push_back(sub);
            V.facet_constraint.push_back(i);
        }
    }
    return V;
}

namespace detail {

struct FaceMeasure {
    double volume = 0;
    Eigen::VectorXd centroid;
};

// Volume and centroid of an m-dimensional face by coning from its vertex mean over its facets.
class FaceVolumes {
public:
    explicit FaceVolumes(const VPolytope& V) : V_(V) {}

    FaceMeasure measure(const std::vector<int>& face, int m) {
        auto it = memo_.find(face);
        if (it != memo_.end()) return it->second;
        FaceMeasure out;
        Eigen::VectorXd c = Eigen::VectorXd::Zero(V_.y[face[0]].size());
        for (int v : face) c += V_.y[v];
        c /= static_cast<double>(face.size());
        if (m == 0) {
            out.volume = 1;
            out.centroid = c;
        } else {
            out.centroid = Eigen::VectorXd::Zero(c.size());
            std::map<std::vector<int>, bool> done;
            const int ncons = static_cast<int>(V_.chart.a.size());
            for (int i = 0; i < ncons; ++i) {
                std::vector<int> sub;
                for (int v : face)
                    if (std::binary_search(V_.incidence[v].begin(), V_.incidence[v].end(), i)) sub.push_back(v);
                if (static_cast<int>(sub.size()) < m || sub.size() == face.size() || done.count(sub)) continue;
                if (affine_rank(V_.y, sub, V_.scale) != m - 1) continue;
                done[sub] = true;
                const FaceMeasure g = measure(sub, m - 1);
                const Eigen::MatrixXd Q = affine_basis(V_.y, sub, m - 1);
                Eigen::VectorXd r = c - V_.y[sub[0]];
                if (Q.cols() > 0) r -= Q * (Q.transpose() * r);
                const double cone = r.norm() * g.volume / m;
                out.volume += cone;
                out.centroid += cone * (c + (static_cast<double>(m) / (m + 1)) * (g.centroid - c));
            }
            if (out.volume > 0) out.centroid /= out.volume;
            else out.centroid = c;
        }
        memo_[face] = out;
        return out;
    }

private:
    const VPolytope& V_;
    std::map<std::vector<int>, FaceMeasure> memo_;
};

inline double measure_factor(int n, Measure m) {
    return m == Measure::Hausdorff ? 1.0 : 1.0 / std::sqrt(static_cast<double>(n));
}

} // namespace detail

// (n-1)-dimensional volume; Hausdorff in the matrix-space metric unless the coordinate chart is requested.
inline double volume(const VPolytope& V, Measure measure = Measure::Hausdorff) {
    if (V.dim < V.chart.d) return 0.0;
    std::vector<int> all(V.y.size());
    std::iota(all.begin(), all.end(), 0);
    detail::FaceVolumes fv(V);
    return fv.measure(all, V.chart.d).volume * detail::measure_factor(V.n, measure);
}

inline LieAVector centroid(const VPolytope& V) {
    std::vector<int> all(V.y.size());
    std::iota(all.begin(), all.end(), 0);
    detail::FaceVolumes fv(V);
    const Eigen::VectorXd c = V.chart.E * fv.measure(all, V.dim == V.chart.d ? V.chart.d : 0).centroid;
    std::vector<double> t(c.data(), c.data() + V.n);
    double s = 0;
    for (double x : t) s += x;
    for (double& x : t) x -= s / V.n;
    return LieAVector(std::move(t));
}

inline double surface_area(const VPolytope& V) {
    if (V.dim < V.chart.d) return 0.0;
    detail::FaceVolumes fv(V);
    double total = 0;
    for (const auto& f : V.facets) total += fv.measure(f, V.chart.d - 1).volume;
    return total;
}

struct Inradius {
    double r = 0;
    LieAVector center;
    Eigen::VectorXd chart_center;
};

inline Inradius inradius(const HPolytope& H) {
    const auto C = detail::to_chart(H);
    if (C.infeasible) throw EmptyPolytope("polytope is empty");
    const int d = C.d;
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (std::size_t i = 0; i < C.a.size(); ++i) {
        std::vector<double> row(d + 1);
        for (int j = 0; j < d; ++j) row[j] = -C.a[i](j);
        row[d] = 1.0;
        A.push_back(std::move(row));
        b.push_back(-C.b[i]);
    }
    std::vector<double> c(d + 1, 0.0);
    c[d] = 1.0;
    const auto res = lp::maximize_free(A, b, c);
    if (res.status == lp::Status::Infeasible || (res.status == lp::Status::Optimal && res.x[d] < -1e-9))
        throw EmptyPolytope("polytope is empty");
    if (res.status == lp::Status::Unbounded) throw UnboundedPolytope("polytope is unbounded");
    Inradius out;
    out.r = std::max(0.0, res.x[d]);
    out.chart_center = Eigen::Map<const Eigen::VectorXd>(res.x.data(), d);
    const Eigen::VectorXd t = C.E * out.chart_center;
    std::vector<double> tv(t.data(), t.data() + H.n);
    double s = 0;
    for (double x : tv) s += x;
    for (double& x : tv) x -= s / H.n;
    out.center = LieAVector(std::move(tv));
    return out;
}

// Uniform sampler: box rejection, or independent hit-and-run chains from the Chebyshev centre
// (burn-in 10 d^2 steps) when the acceptance rate falls below 1%.
class UniformSampler {
public:
    explicit UniformSampler(const HPolytope& H) : V_(vertices(H)) {
        const int d = V_.chart.d;
        vol_ = orbitkit::volume(V_);
        if (!(vol_ > 0)) throw EmptyPolytope("polytope has empty interior");
        lo_ = V_.y[0];
        hi_ = V_.y[0];
        for (const auto& y : V_.y) {
            lo_ = lo_.cwiseMin(y);
            hi_ = hi_.cwiseMax(y);
        }
        double box = 1;
        for (int j = 0; j < d; ++j) box *= hi_(j) - lo_(j);
        box_volume_ = box;
        acceptance_ = vol_ / box;
        hit_and_run_ = acceptance_ < 0.01;
        if (hit_and_run_) {
            center_ = inradius(H).chart_center;
            burn_in_ = 10 * d * d;
        }
    }

    bool hit_and_run() const { return hit_and_run_; }
    double acceptance() const { return acceptance_; }
    double volume() const { return vol_; }
    double box_volume() const { return box_volume_; }
    const VPolytope& polytope() const { return V_; }
    int burn_in() const { return burn_in_; }

    Eigen::VectorXd draw_chart(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) const {
        Substream rng(seed, stream, index);
        const auto d = lo_.size();
        if (!hit_and_run_) {
            Eigen::VectorXd y(d);
            for (;;) {
                for (Eigen::Index j = 0; j < d; ++j) y(j) = rng.uniform(lo_(j), hi_(j));
                if (detail::chart_feasible(V_.chart, y, 0.0)) return y;
            }
        }
        Eigen::VectorXd y = center_, dir(d);
        for (int step = 0; step < burn_in_; ++step) {
            for (Eigen::Index j = 0; j < d; ++j) dir(j) = rng.normal();
            dir.normalize();
            double tmin = -std::numeric_limits<double>::infinity(), tmax = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < V_.chart.a.size(); ++i) {
                const double ad = V_.chart.a[i].dot(dir);
                const double slack = V_.chart.a[i].dot(y) - V_.chart.b[i];
                if (ad > 1e-15) tmin = std::max(tmin, -slack / ad);
                else if (ad < -1e-15) tmax = std::min(tmax, -slack / ad);
            }
            if (!(tmax > tmin)) continue;
            y += rng.uniform(tmin, tmax) * dir;
        }
        return y;
    }

    LieAVector lift(const Eigen::VectorXd& y) const {
        const Eigen::VectorXd t = V_.chart.E * y;
        std::vector<double> tv(t.data(), t.data() + V_.n);
        double s = 0;
        for (double x : tv) s += x;
        for (double& x : tv) x -= s / V_.n;
        return LieAVector(std::move(tv));
    }

    LieAVector draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) const {
        return lift(draw_chart(seed, stream, index));
    }

private:
    VPolytope V_;
    double vol_ = 0, box_volume_ = 0, acceptance_ = 1;
    Eigen::VectorXd lo_, hi_, center_;
    bool hit_and_run_ = false;
    int burn_in_ = 0;
};

inline std::vector<LieAVector> sample_uniform(const HPolytope& H, std::size_t count, std::uint64_t seed,
                                              unsigned threads = 1, std::uint64_t stream = 0) {
    const UniformSampler S(H);
    std::vector<LieAVector> out(count);
    parallel_for(count, threads, [&](std::size_t i) { out[i] = S.draw(seed, stream, i); });
    return out;
}

struct Estimate {
    double value = 0;
    double stderr_ = 0;
};

// Plain box-rejection Monte Carlo volume (Hausdorff measure).
inline Estimate mc_volume(const HPolytope& H, std::size_t samples, std::uint64_t seed, unsigned threads = 1) {
    const VPolytope V = vertices(H);
    const auto d = V.chart.d;
    Eigen::VectorXd lo = V.y[0], hi = V.y[0];
    for (const auto& y : V.y) {
        lo = lo.cwiseMin(y);
        hi = hi.cwiseMax(y);
    }
    double box = 1;
    for (int j = 0; j < d; ++j) box *= hi(j) - lo(j);
    std::vector<char> hit(samples);
    parallel_for(samples, threads, [&](std::size_t i) {
        Substream rng(seed, 0x766f6cULL, i);
        Eigen::VectorXd y(d);
        for (int j = 0; j < d; ++j) y(j) = rng.uniform(lo(j), hi(j));
        hit[i] = detail::chart_feasible(V.chart, y, 0.0);
    });
    const double p = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / samples;
    return {box * p, box * std::sqrt(p * (1 - p) / samples)};
}

// Euclidean distance from chart points to the polytope, by projecting onto every face.
class DistanceOracle {
public:
    explicit DistanceOracle(const VPolytope& V) : V_(V) {
        std::map<std::vector<int>, bool> seen;
        std::vector<std::vector<int>> frontier;
        for (const auto& f : V.facets) {
            if (!seen.count(f)) {
                seen[f] = true;
                frontier.push_back(f);
            }
        }
        std::vector<std::vector<int>> faces = frontier;
        while (!frontier.empty()) {
            std::vector<std::vector<int>> next;
            for (std::size_t i = 0; i < frontier.size(); ++i)
                for (const auto& g : faces) {
                    std::vector<int> inter;
                    std::set_intersection(frontier[i].begin(), frontier[i].end(), g.begin(), g.end(), std::back_inserter(inter));
                    if (inter.empty() || seen.count(inter)) continue;
                    seen[inter] = true;
                    next.push_back(inter);
                }
            faces.insert(faces.end(), next.begin(), next.end());
            frontier = std::move(next);
        }
        for (std::size_t v = 0; v < V.y.size(); ++v)
            if (!seen.count({static_cast<int>(v)})) faces.push_back({static_cast<int>(v)});
        for (const auto& f : faces) {
            const int r = detail::affine_rank(V.y, f, V.scale);
            faces_.push_back({V.y[f[0]], detail::affine_basis(V.y, f, r)});
        }
    }

    double distance(const Eigen::VectorXd& y) const {
        if (detail::chart_feasible(V_.chart, y, 0.0)) return 0.0;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& f : faces_) {
            Eigen::VectorXd p = f.origin;
            if (f.basis.cols() > 0) p += f.basis * (f.basis.transpose() * (y - f.origin));
            if (!detail::chart_feasible(V_.chart, p, 1e-9)) continue;
            best = std::min(best, (y - p).norm());
        }
        return best;
    }

private:
    struct Face {
        Eigen::VectorXd origin;
        Eigen::MatrixXd basis;
    };
    const VPolytope& V_;
    std::vector<Face> faces_;
};

// Monte Carlo volume of the eps-neighbourhood of the polytope inside the hyperplane.
inline Estimate mc_neighborhood_volume(const HPolytope& H, double eps, std::size_t samples, std::uint64_t seed,
                                       unsigned threads = 1) {
    const VPolytope V = vertices(H);
    const DistanceOracle D(V);
    const auto d = V.chart.d;
    Eigen::VectorXd lo = V.y[0], hi = V.y[0];
    for (const auto& y : V.y) {
        lo = lo.cwiseMin(y);
        hi = hi.cwiseMax(y);
    }
    lo.array() -= eps;
    hi.array() += eps;
    double box = 1;
    for (int j = 0; j < d; ++j) box *= hi(j) - lo(j);
    std::vector<char> hit(samples);
    parallel_for(samples, threads, [&](std::size_t i) {
        Substream rng(seed, 0x6e6267ULL, i);
        Eigen::VectorXd y(d);
        for (int j = 0; j < d; ++j) y(j) = rng.uniform(lo(j), hi(j));
        hit[i] = D.distance(y) <= eps;
    });
    const double p = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / samples;
    return {box * p, box * std::sqrt(p * (1 - p) / samples)};
}

// Omega_{g,delta}: omega_I(t) >= ln(delta) - ln||g e_I|| for every proper nonempty I.
inline HPolytope omega_polytope(const Matrix<Rational>& g, double delta) {
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0,1)");
    const int n = static_cast<int>(g.rows());
    if (n < 2 || n > 6) throw std::invalid_argument("omega_polytope: n must lie in 2..6");
    HPolytope H;
    H.n = n;
    for (const auto& I : all_multi_indices(n, false)) {
        std::vector<double> a(n, 0.0);
        for (int i : I.zero_based()) a[i] = 1.0;
        H.constraints.push_back({std::move(a), std::log(delta) - log_wedge_norm(g, I), I.str()});
    }
    return H;
}

inline HPolytope omega_polytope(const Matrix<double>& g, double delta) {
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0,1)");
    const int n = static_cast<int>(g.rows());
    if (n < 2 || n > 6) throw std::invalid_argument("omega_polytope: n must lie in 2..6");
    HPolytope H;
    H.n = n;
    for (const auto& I : all_multi_indices(n, false)) {
        std::vector<double> a(n, 0.0);
        for (int i : I.zero_based()) a[i] = 1.0;
        H.constraints.push_back({std::move(a), std::log(delta) - std::log(wedge_norm(g, I)), I.str()});
    }
    return H;
}

} // namespace orbitkit
