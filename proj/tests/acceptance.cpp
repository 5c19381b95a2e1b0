#include "orbitkit/counting.hpp"
#include "orbitkit/equidist.hpp"
#include "orbitkit/r_polytope.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

using namespace orbitkit;

namespace {

const unsigned kThreads = std::max(1u, std::thread::hardware_concurrency());

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [fail: " << what << "]";
        }
    }
};

bool run(int id, const std::string& name, double budget_s, const std::function<void(Verdict&)>& body) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(v);
    } catch (const std::exception& e) {
        v.pass = false;
        v.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget_s) {
        v.pass = false;
        v.detail << " [fail: runtime over " << budget_s << " s]";
    }
    std::printf("%s %2d %s (%.2f s):%s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), secs, v.detail.str().c_str());
    std::fflush(stdout);
    return v.pass;
}

std::string str(const std::vector<std::vector<int>>& b) {
    std::string s = "[";
    for (std::size_t i = 0; i < b.size(); ++i) {
        s += i ? ",[" : "[";
        for (std::size_t j = 0; j < b[i].size(); ++j) s += (j ? "," : "") + std::to_string(b[i][j]);
        s += "]";
    }
    return s + "]";
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

// UDS by definition: every member's smaller-indexed neighbours are members.
bool uds_by_definition(const PatternGraph& G, std::uint32_t S) {
    if (!S) return false;
    for (int i = 1; i <= G.n; ++i) {
        if (!((S >> (i - 1)) & 1u)) continue;
        for (int j = 1; j < i; ++j)
            if (G.has_edge(i, j) && !((S >> (j - 1)) & 1u)) return false;
    }
    return true;
}

PolyFamily random_dichotomy_family(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_int_distribution<int> coef(-3, 3), deg(1, 2);
    const double density = 0.2 + 0.5 * u(rng);
    PolyFamily F = PolyFamily::identity(n, "random");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (u(rng) >= density) continue;
            const int d = deg(rng);
            std::vector<Rational> c(d + 1);
            for (int p = 1; p <= d; ++p) c[p] = coef(rng);
            if (c[d] == 0) c[d] = 1;
            F(i, j) = RationalPolynomial(c);
        }
    return F;
}

PolyFamily sl2_family() {
    PolyFamily F = PolyFamily::identity(2, "sl2");
    F(0, 1) = RationalPolynomial::monomial(1, 1);
    return F;
}

ExperimentConfig load_config(const std::string& name) {
    return parse_experiment(load_family_file(std::string(ORBITKIT_CONFIG_DIR) + "/" + name));
}

void criterion1(Verdict& v) {
    using B = std::vector<std::vector<int>>;
    const auto L1 = predict_limit(divergence_pattern(families::example1()));
    v.require(L1.haar && L1.basisA.empty(), "(1) expected A = {0}, Haar");
    const auto L2 = predict_limit(divergence_pattern(families::example1()), families::example2_S());
    v.require(L2.basisA.empty() && L2.haar, "(2) expected A(S) = {0}");
    const auto L3 = predict_limit(divergence_pattern(families::example3()));
    const std::vector<Rational> d3 = {1, 1, -1, -1};
    v.require(L3.basisA.size() == 1 && L3.basisA[0].t == d3, "(3) expected span diag(1,1,-1,-1)");
    v.require(L3.blocks == B{{1, 2}, {3, 4}}, "(3) blocks");
    const auto L4 = predict_limit(divergence_pattern(families::example4()), families::example4_S());
    const std::vector<Rational> d4 = {1, 1, 1, -3};
    v.require(L4.basisA.size() == 1 && L4.basisA[0].t == d4, "(4) expected span diag(1,1,1,-3)");
    v.require(L4.blocks == B{{1, 2, 3}, {4}}, "(4) blocks");
    v.detail << " (1) haar=" << L1.haar << " (2) dimA=" << L2.basisA.size() << " (3) blocks=" << str(L3.blocks)
             << " (4) blocks=" << str(L4.blocks);
}

void criterion2(Verdict& v) {
    std::mt19937_64 rng(2024);
    int families_checked = 0, indices_checked = 0, mismatches = 0, dim_fail = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 4;
        const auto F = random_dichotomy_family(n, rng);
        const auto P = divergence_pattern(F);
        const auto G = graph_of(P);
        if (script_A(P).size() + 1 != G.components().size()) ++dim_fail;
        for (const auto& I : all_multi_indices(n)) {
            const bool fixed = check_uds_boundedness(F, I) == Boundedness::Fixed;
            if (fixed != uds_by_definition(G, I.mask())) ++mismatches;
            ++indices_checked;
        }
        ++families_checked;
    }
    v.require(dim_fail == 0, std::to_string(dim_fail) + " dimension mismatches");
    v.require(mismatches == 0, std::to_string(mismatches) + " fixedness/UDS mismatches");
    v.detail << " " << families_checked << " families, " << indices_checked << " multi-indices, dim failures "
             << dim_fail << ", mismatches " << mismatches;
}

void criterion3(Verdict& v) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    int checked = 0, failures = 0;
    while (checked < 100) {
        const int n = 2 + checked % 7;
        const double p = 0.15 + 0.5 * u(rng);
        PatternGraph G(n);
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j)
                if (u(rng) < p) G.add_edge(i, j);
        if (!G.connected()) continue;
        const auto x = uds_certificate(G);
        bool ok = verify_certificate(G, x);
        Rational total = 0;
        for (const auto& xi : x) total += xi;
        ok = ok && total == 0;
        const std::uint32_t full = (1u << n) - 1;
        for (std::uint32_t S = 1; S < full; ++S) {
            if (!uds_by_definition(G, S)) continue;
            Rational s = 0;
            for (int i = 0; i < n; ++i)
                if ((S >> i) & 1u) s += x[i];
            ok = ok && s > 0;
        }
        if (!ok) ++failures;
        ++checked;
    }
    v.require(failures == 0, std::to_string(failures) + " certificate failures");
    v.detail << " " << checked << " connected graphs (n = 2..8), failures " << failures;
}

void criterion4(Verdict& v) {
    const auto ex1 = families::example1();
    auto omega = [&](long k, double delta) { return omega_polytope(ex1.at(Rational(k)), delta); };

    std::vector<std::pair<std::string, HPolytope>> zoo;
    for (long k : {10L, 100L, 1000L, 10000L}) zoo.emplace_back("ex1 k=" + std::to_string(k), omega(k, 0.1));
    for (long k : {10L, 1000L}) {
        zoo.emplace_back("ex3 k=" + std::to_string(k), omega_polytope(families::example3().at(Rational(k)), 0.1));
        zoo.emplace_back("R ex1 k=" + std::to_string(k), r_polytope(ex1.at(Rational(k)), 0.1));
    }
    zoo.emplace_back("sl2 k=100", omega_polytope(sl2_family().at(Rational(100)), 0.1));
    int area_bad = 0, nbhd_bad = 0;
    for (const auto& [name, H] : zoo) {
        const auto V = vertices(H);
        const double vol = volume(V), r = inradius(H).r;
        const int d = H.n - 1;
        if (surface_area(V) / vol > d / r * (1 + 1e-9)) ++area_bad;
        if (H.n <= 3)
            for (double eps : {0.1, 1.0}) {
                const auto est = mc_neighborhood_volume(H, eps, 200000, 23, kThreads);
                if (est.value / vol > std::pow(1 + eps / r, d) + 3 * est.stderr_ / vol) ++nbhd_bad;
            }
    }
    v.require(area_bad == 0, "area/vol bound violated " + std::to_string(area_bad) + "x");
    v.require(nbhd_bad == 0, "neighbourhood bound violated " + std::to_string(nbhd_bad) + "x");
    v.detail << " inequalities on " << zoo.size() << " polytopes ok=" << (area_bad + nbhd_bad == 0) << ";";

    int mc_bad = 0;
    for (long k : {10L, 10000L}) {
        const auto H = omega(k, 0.1);
        const auto mc = mc_volume(H, 1000000, 17, kThreads);
        if (std::abs(mc.value - volume(vertices(H))) > 3 * mc.stderr_) ++mc_bad;
    }
    v.require(mc_bad == 0, "triangulation vs MC volume");

    std::vector<double> av;
    for (long k : {10L, 100L, 1000L, 10000L}) {
        const auto V = vertices(omega(k, 0.1));
        av.push_back(surface_area(V) / volume(V));
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < av.size(); ++i) decreasing = decreasing && av[i] < av[i - 1];
    v.require(decreasing, "area/vol not strictly decreasing");
    v.require(av.back() < 0.1, "area/vol at k=1e4 is " + fmt(av.back()) + ", needs < 0.1");
    v.detail << " area/vol " << fmt(av[0]) << " > " << fmt(av[1]) << " > " << fmt(av[2]) << " > " << fmt(av[3]) << ";";

    const double dr = volume(vertices(omega(10000, 0.2))) / volume(vertices(omega(10000, 0.05)));
    v.require(dr >= 0.95 && dr <= 1.0, "delta-ratio " + fmt(dr) + " outside [0.95,1]");
    v.detail << " delta-ratio " << fmt(dr) << ";";

    for (const auto& F : {sl2_family(), ex1}) {
        const auto g = F.at(Rational(10000));
        const double q = volume(vertices(omega_polytope(g, 0.1))) / volume(vertices(r_polytope(g, 0.1)));
        v.require(q >= 0.8 && q <= 1.25, "Omega/R for n=" + std::to_string(F.n) + " is " + fmt(q));
        v.detail << " Omega/R(n=" << F.n << ") " << fmt(q) << ";";
    }
}

void criterion5and7(Verdict& v5, Verdict& v7) {
    v7.pass = true;
    v7.detail.str("");
    auto cfg = load_config("ex1.json");
    cfg.samples = 100000;
    const auto runs = run_experiment(cfg, kThreads);
    const double siegel = siegel_oracle(3, 0.8);
    std::vector<double> err;
    for (const auto& r : runs) err.push_back(std::abs(summarize(r).observables[0].mean - siegel));
    const double rel = err.back() / siegel;
    const std::size_t K = err.size();
    v5.require(rel <= 0.15, "pointCount(0.8) off Siegel by " + fmt(100 * rel, 3) + "% at k=1e4");
    v5.require(err[K - 1] < err[K - 2] && err[K - 2] < err[K - 3], "|error| not decreasing over last two steps");
    const auto ratios = ratio_convergence(runs, 1, 0);
    const double q = ratios.back().ratio;
    v5.require(std::abs(q / 2.0 - 1) <= 0.15, "ratio " + fmt(q) + " not within 15% of 2");
    v5.detail << " Siegel " << fmt(siegel) << ", |error| by k:";
    for (std::size_t i = 0; i < K; ++i) v5.detail << " " << fmt(err[i]);
    v5.detail << " (" << fmt(100 * rel, 3) << "% at k=1e4); ratio " << fmt(q) << " +- " << fmt(ratios.back().stderr_, 2);

    const auto esc = escape_mass(runs, {0.05});
    double worst = 0;
    for (const auto& c : esc)
        if (c.k >= 100) worst = std::max(worst, c.fraction[0]);
    v7.require(worst <= 0.05, "escape fraction " + fmt(worst));
    v7.detail << " max escape fraction at r=0.05 over k>=100: " << fmt(worst);
}

void criterion6(Verdict& v) {
    const auto cfg = load_config("ex3.json");
    const auto reps = block_factor_test(cfg, kThreads);
    std::size_t exact = 0, total = 0;
    for (const auto& r : reps) {
        exact += r.split_exact;
        total += r.samples;
    }
    v.require(exact == total, "split failed on " + std::to_string(total - exact) + " samples");
    v.detail << " exact splits " << exact << "/" << total << ";";
    for (const auto& b : reps.back().blocks) {
        const double rel = b.point_count.mean / b.siegel - 1;
        v.require(std::abs(rel) <= 0.15, "block " + str({b.block}) + " off by " + fmt(100 * rel, 3) + "%");
        v.detail << " block " << str({b.block}) << " pointCount " << fmt(b.point_count.mean) << " vs " << fmt(b.siegel)
                 << ";";
    }
}

std::vector<long long> random_roots(std::mt19937_64& rng, int n) {
    std::uniform_int_distribution<int> r(-9, 9);
    std::vector<long long> a;
    while (static_cast<int>(a.size()) < n) {
        const long long x = r(rng);
        if (x != 0 && std::find(a.begin(), a.end(), x) == a.end()) a.push_back(x);
    }
    return a;
}

void criterion8(Verdict& v) {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> num(-20, 20), den(1, 9);
    int rt_bad = 0, cdet_bad = 0, jac_bad = 0, wedge_bad = 0, wedge_total = 0;
    for (int n : {2, 3, 4}) {
        for (int trial = 0; trial < 100; ++trial) {
            const CharPolyData cp(random_roots(rng, n));
            auto u = Matrix<Rational>::identity(n);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) u(i, j) = Rational(num(rng), den(rng));
            if (!(x_to_u(cp, conj_by_unipotent(cp, u)) == u)) ++rt_bad;
        }
    }
    for (int n = 2; n <= 5; ++n)
        for (int trial = 0; trial < 10; ++trial) {
            const CharPolyData cp(random_roots(rng, n));
            for (const auto& I : all_multi_indices(n, true)) {
                const Rational c = c_det(cp, I);
                if (c != c_det_closed_form(cp, I) || c == 0) ++cdet_bad;
            }
        }
    std::uniform_real_distribution<double> ux(-3, 3);
    for (const auto& roots : {std::vector<long long>{1, 2}, std::vector<long long>{1, 2, 4},
                              std::vector<long long>{-2, 1, 5, 7}}) {
        const CharPolyData cp(roots);
        const double expected = to_double(jacobian_factor(cp));
        double closed = 1;
        for (int i = 0; i < cp.n(); ++i)
            for (int j = i + 1; j < cp.n(); ++j) closed /= std::abs(double(cp.alpha[j] - cp.alpha[i]));
        if (std::abs(expected - closed) > 1e-12 * closed) ++jac_bad;
        for (int p = 0; p < 10; ++p) {
            std::vector<double> xs(cp.m());
            for (auto& x : xs) x = ux(rng);
            if (std::abs(jacobian_fd(cp, xs) - closed) > 1e-6 * closed) ++jac_bad;
        }
    }
    for (const auto& roots : {std::vector<long long>{1, 2, 3}, std::vector<long long>{1, 2, 3, 4},
                              std::vector<long long>{-3, -1, 2, 5}}) {
        const CharPolyData cp(roots);
        for (const auto& I : all_multi_indices(cp.n(), true)) {
            ++wedge_total;
            if (std::abs(to_double(leading_wedge_check(cp, I, Rational(1000000))) - 1) > 1e-3) ++wedge_bad;
        }
    }
    v.require(rt_bad == 0, "round trip");
    v.require(cdet_bad == 0, "c_det closed form / nonzero");
    v.require(jac_bad == 0, "Jacobian");
    v.require(wedge_bad == 0, "leading wedge");
    v.detail << " round trips 300 bad " << rt_bad << ", c_det bad " << cdet_bad << ", Jacobian bad " << jac_bad
             << ", wedge checks " << wedge_total << " bad " << wedge_bad;
}

void criterion9(Verdict& v) {
    const double expect[2][2] = {{std::sqrt(2.0), 1.0}, {3 * std::sqrt(3.0), 3.0}};
    for (int n : {2, 3}) {
        const auto H = c0_polytope(n);
        const auto mc = mc_volume(H, 1000000, 90 + n, kThreads);
        int m = 0;
        for (Measure meas : {Measure::Hausdorff, Measure::Coordinate}) {
            const double exact = c0_volume(n, meas);
            const double est = mc.value * detail::measure_factor(n, meas);
            const double want = expect[n - 2][m++];
            v.require(std::abs(exact - want) <= 1e-12 * want, "c0(" + std::to_string(n) + ") = " + fmt(exact, 17));
            v.require(std::abs(est / exact - 1) <= 0.01, "MC c0(" + std::to_string(n) + ") = " + fmt(est));
            v.detail << " c0(" << n << "," << (meas == Measure::Hausdorff ? "hausdorff" : "coordinate")
                     << ")=" << fmt(exact, 8) << " mc " << fmt(est, 6) << ";";
        }
    }
}

void criterion10(Verdict& v) {
    const CharPolyData cp({1, 2});
    v.require(enumerate_VZ(cp, 3, kThreads) == 18, "golden T=3 count");
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(500.0 * i);
    const double cx = cx_sl2();
    const auto rep = count_report(cp, grid, cx, kThreads);
    v.require(rep.law.r2 >= 0.99, "R^2 " + fmt(rep.law.r2));
    const double last = rep.ratio.back();
    v.require(last >= 0.75 && last <= 1.33, "ratio at T=5000 " + fmt(last));
    const std::size_t K = rep.ratio.size();
    const double d1 = std::abs(rep.ratio[K - 3] - 1), d2 = std::abs(rep.ratio[K - 2] - 1), d3 = std::abs(rep.ratio[K - 1] - 1);
    v.require(d2 < d1 && d3 < d2, "|ratio-1| not decreasing over top three grid points");
    v.detail << " n=2: R^2 " << fmt(rep.law.r2, 6) << ", cX " << fmt(cx, 8) << ", ratio at T=5000 " << fmt(last)
             << ", |ratio-1| at T=4000,4500,5000: " << fmt(d1) << " " << fmt(d2) << " " << fmt(d3) << ";";

    const CharPolyData cp3({1, 2, 3});
    const auto rep3 = count_report(cp3, {10, 15, 20, 25, 30}, std::nullopt, kThreads);
    v.require(rep3.loglog.slope >= 2.7 && rep3.loglog.slope <= 3.3, "n=3 log-log slope " + fmt(rep3.loglog.slope));
    v.detail << " n=3 (T=10..30): log-log slope " << fmt(rep3.loglog.slope) << ", counts";
    for (auto c : rep3.counts) v.detail << " " << c;
}

} // namespace

int main() {
    int failed = 0;
    failed += !run(1, "limit prediction fidelity", 1, criterion1);
    failed += !run(2, "dim A and fixedness vs UDS", 30, criterion2);
    failed += !run(3, "UDS certificates", 10, criterion3);
    failed += !run(4, "polytope inequality suite", 300, criterion4);
    Verdict v7;
    v7.pass = false;
    v7.detail << " [not evaluated]";
    failed += !run(5, "equidistribution toward Haar", 600, [&](Verdict& v5) { criterion5and7(v5, v7); });
    failed += !run(6, "block-case structure", 300, criterion6);
    std::printf("%s %2d %s (shared with 5):%s\n", v7.pass ? "PASS" : "FAIL", 7, "nondivergence", v7.detail.str().c_str());
    failed += !v7.pass;
    failed += !run(8, "counting exact algebra", 30, criterion8);
    failed += !run(9, "c0 values", 60, criterion9);
    failed += !run(10, "counting law", 300, criterion10);
    std::printf("%d of 10 criteria failed\n", failed);
    return failed ? 1 : 0;
}
