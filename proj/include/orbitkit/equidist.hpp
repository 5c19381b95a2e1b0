#pragma once

#include "orbitkit/family_io.hpp"
#include "orbitkit/lattice.hpp"
#include "orbitkit/polytope.hpp"
#include "orbitkit/stats.hpp"

namespace orbitkit {

struct DegenerateDenominator : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BlockIncompatible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Observable {
    enum class Kind { PointCount, Lambda1Below, RadialBump };
    Kind kind = Kind::PointCount;
    double r = 0;
    double r0 = 0, r1 = 0;

    static Observable point_count(double r) {
        if (!(r > 0)) throw std::invalid_argument("pointCount radius must be positive");
        return {Kind::PointCount, r, 0, 0};
    }
    static Observable lambda1_below(double r) {
        if (!(r >= 0)) throw std::invalid_argument("lambda1Below radius must be nonnegative");
        return {Kind::Lambda1Below, r, 0, 0};
    }
    static Observable radial_bump(double r0, double r1) {
        if (!(r0 >= 0 && r1 > r0)) throw std::invalid_argument("radialBump needs 0 <= r0 < r1");
        return {Kind::RadialBump, 0, r0, r1};
    }

    std::string label() const {
        std::ostringstream s;
        s.precision(17);
        switch (kind) {
        case Kind::PointCount: s << "pointCount(" << r << ")"; break;
        case Kind::Lambda1Below: s << "lambda1Below(" << r << ")"; break;
        case Kind::RadialBump: s << "radialBump(" << r0 << "," << r1 << ")"; break;
        }
        return s.str();
    }

    // Radius up to which lattice points must be enumerated to evaluate this observable.
    double reach() const { return kind == Kind::PointCount ? r : 0.0; }

    double bump(double lambda1) const {
        if (lambda1 <= r0) return 1;
        if (lambda1 >= r1) return 0;
        return (r1 - lambda1) / (r1 - r0);
    }
};

struct ExperimentConfig {
    PolyFamily family;
    std::vector<long long> k;
    double delta = 0.1;
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
    std::vector<Observable> observables;
    std::vector<double> escape_r;
    double block_r = 0.8;
};

namespace detail {

inline double number_field(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number()) throw ParseError(field + ": expected a number");
    return j.get<double>();
}

} // namespace detail

inline ExperimentConfig parse_experiment(const FamilyFile& f) {
    const auto& e = f.experiment;
    if (!e.is_object()) throw ParseError("experiment: missing or not an object");
    ExperimentConfig cfg;
    cfg.family = f.family;
    if (!e.contains("k") || !e["k"].is_array() || e["k"].empty()) throw ParseError("experiment.k: expected a nonempty list");
    for (std::size_t i = 0; i < e["k"].size(); ++i) {
        const auto& v = e["k"][i];
        const std::string field = "experiment.k[" + std::to_string(i) + "]";
        if (!v.is_number_integer() || v.get<long long>() < 1) throw ParseError(field + ": expected a positive integer");
        if (!cfg.k.empty() && v.get<long long>() <= cfg.k.back()) throw ParseError(field + ": k values must increase");
        cfg.k.push_back(v.get<long long>());
    }
    if (e.contains("delta")) {
        const auto& d = e["delta"];
        cfg.delta = d.is_string() ? to_double(detail::parse_rational_field(d, "experiment.delta")) : detail::number_field(d, "experiment.delta");
    }
    if (!(cfg.delta > 0 && cfg.delta < 1)) throw ParseError("experiment.delta: must lie in (0,1)");
    if (e.contains("samples")) {
        if (!e["samples"].is_number_integer() || e["samples"].get<long long>() < 1000)
            throw ParseError("experiment.samples: expected an integer >= 1000");
        cfg.samples = e["samples"].get<std::size_t>();
    }
    if (e.contains("seed")) {
        if (!e["seed"].is_number_unsigned()) throw ParseError("experiment.seed: expected a nonnegative integer");
        cfg.seed = e["seed"].get<std::uint64_t>();
    }
    if (e.contains("observables")) {
        if (!e["observables"].is_array()) throw ParseError("experiment.observables: expected a list");
        for (std::size_t i = 0; i < e["observables"].size(); ++i) {
            const auto& o = e["observables"][i];
            const std::string field = "experiment.observables[" + std::to_string(i) + "]";
            if (!o.is_object() || !o.contains("kind") || !o["kind"].is_string()) throw ParseError(field + ".kind: missing");
            const auto kind = o["kind"].get<std::string>();
            try {
                if (kind == "pointCount") {
                    cfg.observables.push_back(Observable::point_count(detail::number_field(o.value("r", nlohmann::json()), field + ".r")));
                } else if (kind == "lambda1Below") {
                    cfg.observables.push_back(Observable::lambda1_below(detail::number_field(o.value("r", nlohmann::json()), field + ".r")));
                } else if (kind == "radialBump") {
                    cfg.observables.push_back(Observable::radial_bump(detail::number_field(o.value("r0", nlohmann::json()), field + ".r0"),
                                                                      detail::number_field(o.value("r1", nlohmann::json()), field + ".r1")));
                } else {
                    throw ParseError(field + ".kind: unknown observable '" + kind + "'");
                }
            } catch (const std::invalid_argument& err) {
                throw ParseError(field + ": " + err.what());
            }
        }
    }
    if (e.contains("escape_r")) {
        if (!e["escape_r"].is_array()) throw ParseError("experiment.escape_r: expected a list");
        for (std::size_t i = 0; i < e["escape_r"].size(); ++i) {
            const double r = detail::number_field(e["escape_r"][i], "experiment.escape_r[" + std::to_string(i) + "]");
            if (r < 0) throw ParseError("experiment.escape_r[" + std::to_string(i) + "]: must be nonnegative");
            cfg.escape_r.push_back(r);
        }
    }
    if (e.contains("block_r")) {
        cfg.block_r = detail::number_field(e["block_r"], "experiment.block_r");
        if (!(cfg.block_r > 0)) throw ParseError("experiment.block_r: must be positive");
    }
    return cfg;
}

// Haar average of the number of nonzero lattice points in B_r (Siegel mean value theorem).
inline double siegel_oracle(int n, double r) {
    if (r < 0) throw std::invalid_argument("siegel_oracle: r must be nonnegative");
    return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1) * std::pow(r, n);
}

struct LatticeStats {
    double lambda1 = 0;
    std::vector<std::int64_t> counts;  // nonzero points with norm <= radii[i]
};

// One LLL reduction and one enumeration serve the shortest vector and every ball count.
inline LatticeStats lattice_stats(const MatrixLD& basis, const std::vector<double>& radii) {
    if (basis.cols() > 6) throw CapExceeded("lattice_stats: dimension above 6");
    const MatrixLD B = lll_reduce(basis);
    const Gso g = gso_from_basis(B);
    long double rmax2 = 0;
    for (double r : radii) rmax2 = std::max<long double>(rmax2, static_cast<long double>(r) * r);
    const long double b1 = B.col(0).squaredNorm();
    const long double R2 = std::max(rmax2, b1) * (1 + 1e-9L) + 1e-18L;
    LatticeStats s;
    s.counts.assign(radii.size(), 0);
    long double best = b1;
    std::int64_t total = 0;
    enumerate_gso(g, R2, [&](const std::vector<std::int64_t>& x, long double, long double r2) {
        VectorLD v = VectorLD::Zero(B.rows());
        bool zero = true;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (x[j] != 0) {
                zero = false;
                v += static_cast<long double>(x[j]) * B.col(j);
            }
        if (zero) return r2;
        const long double n2 = v.squaredNorm();
        best = std::min(best, n2);
        for (std::size_t i = 0; i < radii.size(); ++i)
            if (n2 <= static_cast<long double>(radii[i]) * radii[i]) ++s.counts[i];
        if (++total > 10000000) throw CapExceeded("lattice_stats: more than 1e7 points");
        return r2;
    });
    s.lambda1 = static_cast<double>(std::sqrt(best));
    return s;
}

inline MatrixLD to_matrix_ld(const Matrix<Rational>& g) {
    MatrixLD out(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) out(i, j) = to_long_double(g(i, j));
    return out;
}

// Basis of g exp(t) Z^n.
inline MatrixLD pushed_basis(const MatrixLD& g, const LieAVector& t) {
    MatrixLD B = g;
    for (Eigen::Index j = 0; j < B.cols(); ++j) B.col(j) *= std::exp(static_cast<long double>(t[j]));
    return B;
}

struct KRun {
    long long k = 0;
    double omega_volume = 0;
    std::vector<LieAVector> t;
    std::vector<double> lambda1;
    std::vector<std::vector<double>> values;  // [observable][sample]
};

// Samples t uniformly on Omega_{g(k),delta} and evaluates every observable on g(k) exp(t) Z^n.
// Draws come from the substream (seed, k, index), so results do not depend on the thread count.
inline KRun run_k(const ExperimentConfig& cfg, long long k, unsigned threads = 1) {
    if (cfg.family.n > 4) throw CapExceeded("equidist: n above 4");
    const Matrix<Rational> g = cfg.family.at(Rational(k));
    const UniformSampler S(omega_polytope(g, cfg.delta));
    const MatrixLD gl = to_matrix_ld(g);
    std::vector<double> radii;
    for (const auto& o : cfg.observables)
        if (o.kind == Observable::Kind::PointCount) radii.push_back(o.r);
    KRun run;
    run.k = k;
    run.omega_volume = S.volume();
    run.t.resize(cfg.samples);
    run.lambda1.resize(cfg.samples);
    run.values.assign(cfg.observables.size(), std::vector<double>(cfg.samples));
    parallel_for(cfg.samples, threads, [&](std::size_t i) {
        run.t[i] = S.draw(cfg.seed, static_cast<std::uint64_t>(k), i);
        const auto st = lattice_stats(pushed_basis(gl, run.t[i]), radii);
        run.lambda1[i] = st.lambda1;
        std::size_t c = 0;
        for (std::size_t o = 0; o < cfg.observables.size(); ++o) {
            const auto& ob = cfg.observables[o];
            switch (ob.kind) {
            case Observable::Kind::PointCount: run.values[o][i] = static_cast<double>(st.counts[c++]); break;
            case Observable::Kind::Lambda1Below: run.values[o][i] = st.lambda1 < ob.r ? 1.0 : 0.0; break;
            case Observable::Kind::RadialBump: run.values[o][i] = ob.bump(st.lambda1); break;
            }
        }
    });
    return run;
}

inline std::vector<KRun> run_experiment(const ExperimentConfig& cfg, unsigned threads = 1) {
    std::vector<KRun> runs;
    for (long long k : cfg.k) runs.push_back(run_k(cfg, k, threads));
    return runs;
}

struct KSummary {
    long long k = 0;
    double omega_volume = 0;
    double lambda_k = 0;  // 1 / Vol(Omega)
    std::size_t samples = 0;
    std::vector<Moments> observables;
    std::vector<std::vector<double>> covariance;
};

inline KSummary summarize(const KRun& run) {
    KSummary s;
    s.k = run.k;
    s.omega_volume = run.omega_volume;
    s.lambda_k = 1 / run.omega_volume;
    s.samples = run.lambda1.size();
    for (const auto& v : run.values) s.observables.push_back(moments(v));
    const auto m = run.values.size();
    s.covariance.assign(m, std::vector<double>(m, 0));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) s.covariance[a][b] = s.covariance[b][a] = covariance(run.values[a], run.values[b]);
    return s;
}

inline std::vector<KSummary> push_sample(const ExperimentConfig& cfg, unsigned threads = 1) {
    std::vector<KSummary> out;
    for (const auto& run : run_experiment(cfg, threads)) out.push_back(summarize(run));
    return out;
}

struct RatioPoint {
    long long k = 0;
    double ratio = 0;
    double stderr_ = 0;
};

// Ratio of sample means with a delta-method standard error.
inline RatioPoint ratio_of_means(const std::vector<double>& f, const std::vector<double>& g) {
    const auto mf = moments(f), mg = moments(g);
    if (mg.mean == 0 || std::abs(mg.mean) <= 3 * mg.stderr_) throw DegenerateDenominator("denominator mean is not bounded away from zero");
    RatioPoint p;
    p.ratio = mf.mean / mg.mean;
    const double N = static_cast<double>(f.size());
    const double cov = covariance(f, g);
    const double v = (mf.variance / (mg.mean * mg.mean) + mf.mean * mf.mean * mg.variance / std::pow(mg.mean, 4) -
                      2 * mf.mean * cov / std::pow(mg.mean, 3)) / N;
    p.stderr_ = std::sqrt(std::max(0.0, v));
    return p;
}

inline std::vector<RatioPoint> ratio_convergence(const std::vector<KRun>& runs, std::size_t f, std::size_t g) {
    std::vector<RatioPoint> out;
    for (const auto& run : runs) {
        if (f >= run.values.size() || g >= run.values.size()) throw std::out_of_range("ratio_convergence: observable index");
        auto p = ratio_of_means(run.values[f], run.values[g]);
        p.k = run.k;
        out.push_back(p);
    }
    return out;
}

struct EscapeCurve {
    long long k = 0;
    std::vector<double> r;
    std::vector<double> fraction;  // share of samples with lambda1 < r
};

inline std::vector<EscapeCurve> escape_mass(const std::vector<KRun>& runs, std::vector<double> r_grid) {
    std::sort(r_grid.begin(), r_grid.end());
    std::vector<EscapeCurve> out;
    for (const auto& run : runs) {
        EscapeCurve c;
        c.k = run.k;
        c.r = r_grid;
        for (double r : r_grid) {
            std::size_t below = 0;
            for (double l : run.lambda1) below += l < r;
            c.fraction.push_back(run.lambda1.empty() ? 0.0 : static_cast<double>(below) / run.lambda1.size());
        }
        out.push_back(std::move(c));
    }
    return out;
}

struct BlockResult {
    std::vector<int> block;  // 1-based coordinates
    double siegel = 0;
    Moments point_count;
    Moments log_covolume;  // sum of t over the block
};

struct BlockKReport {
    long long k = 0;
    std::size_t samples = 0;
    std::size_t split_exact = 0;  // samples whose basis is block diagonal
    std::vector<BlockResult> blocks;
};

// Splits each sampled lattice along the connected components of the family's graph and compares the
// unimodular rescaling of each block lattice with the Siegel value in the block dimension.
inline std::vector<BlockKReport> block_factor_test(const ExperimentConfig& cfg, unsigned threads = 1) {
    const auto comps = graph_of(cfg.family).components();
    const int n = cfg.family.n;
    std::vector<int> owner(n);
    for (std::size_t b = 0; b < comps.size(); ++b)
        for (int i : comps[b]) owner[i - 1] = static_cast<int>(b);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (owner[i] != owner[j] && !cfg.family(i, j).is_zero())
                throw BlockIncompatible("block_factor_test: family mixes coordinate blocks");
    std::vector<BlockKReport> out;
    for (long long k : cfg.k) {
        const Matrix<Rational> g = cfg.family.at(Rational(k));
        const UniformSampler S(omega_polytope(g, cfg.delta));
        const MatrixLD gl = to_matrix_ld(g);
        std::vector<char> split(cfg.samples);
        std::vector<std::vector<double>> counts(comps.size(), std::vector<double>(cfg.samples));
        std::vector<std::vector<double>> logcov(comps.size(), std::vector<double>(cfg.samples));
        parallel_for(cfg.samples, threads, [&](std::size_t s) {
            const auto t = S.draw(cfg.seed, static_cast<std::uint64_t>(k), s);
            const MatrixLD B = pushed_basis(gl, t);
            bool ok = true;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (owner[i] != owner[j] && B(i, j) != 0) ok = false;
            split[s] = ok;
            for (std::size_t b = 0; b < comps.size(); ++b) {
                const auto& idx = comps[b];
                const int d = static_cast<int>(idx.size());
                double lc = 0;
                for (int i : idx) lc += t[i - 1];
                logcov[b][s] = lc;
                if (d == 1) {
                    counts[b][s] = 0;
                    continue;
                }
                MatrixLD sub(d, d);
                for (int p = 0; p < d; ++p)
                    for (int q = 0; q < d; ++q) sub(p, q) = B(idx[p] - 1, idx[q] - 1);
                sub *= std::exp(-static_cast<long double>(lc) / d);
                counts[b][s] = static_cast<double>(lattice_stats(sub, {cfg.block_r}).counts[0]);
            }
        });
        BlockKReport rep;
        rep.k = k;
        rep.samples = cfg.samples;
        rep.split_exact = static_cast<std::size_t>(std::count(split.begin(), split.end(), 1));
        for (std::size_t b = 0; b < comps.size(); ++b) {
            BlockResult br;
            br.block = comps[b];
            br.siegel = comps[b].size() > 1 ? siegel_oracle(static_cast<int>(comps[b].size()), cfg.block_r) : 0.0;
            br.point_count = moments(counts[b]);
            br.log_covolume = moments(logcov[b]);
            rep.blocks.push_back(std::move(br));
        }
        out.push_back(std::move(rep));
    }
    return out;
}

} // namespace orbitkit
