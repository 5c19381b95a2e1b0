#include "orbitkit/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace orbitkit;
using nlohmann::json;

namespace {

enum Exit { Ok = 0, Failure = 1, BadConfig = 2, Cap = 3, Degenerate = 4 };

// Relative output paths land in $OUTPUT when it is set.
std::string resolve_output(const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    const char* dir = std::getenv("OUTPUT");
    if (!dir || !*dir) return p;
    fs::create_directories(dir);
    return (fs::path(dir) / p).string();
}

std::string read_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open config file '" + path + "'");
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

double parse_number(const std::string& field, const std::string& text) {
    try {
        return to_double(parse_rational(text));
    } catch (const std::exception&) {
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw ParseError(field + ": expected a number or p/q, got '" + text + "'");
}

struct Session {
    report::RunManifest manifest;
    std::string manifest_path = "manifest.json";

    void write(const std::string& path, const std::string& content) {
        const std::string p = resolve_output(path);
        if (auto parent = fs::path(p).parent_path(); !parent.empty()) fs::create_directories(parent);
        report::write_file(p, content);
        manifest.outputs.push_back(p);
    }

    // JSON goes to the file when one is named, else to stdout.
    void emit_json(const std::string& path, const json& j) {
        const std::string text = report::to_json_text(j);
        if (path.empty()) std::cout << text;
        else write(path, text);
    }

    void finish() {
        manifest.finished = report::utc_timestamp();
        const std::string p = resolve_output(manifest_path);
        report::write_file(p, report::to_json_text(manifest.to_json()));
    }
};

struct Options {
    std::optional<std::uint64_t> seed;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());

    std::string family, config, out, csv, svg;
    std::string k = "10", delta = "1/10", kind = "omega";
    std::vector<int> l_range;
    std::optional<std::size_t> samples;

    std::vector<long long> roots;
    double tmax = 0;
    int grid = 10;
    std::optional<double> cx;

    int n = 2;
};

void cmd_predict(const Options& o, Session& s) {
    s.manifest.config_hash = report::hex64(report::fnv1a(read_bytes(o.family)));
    const auto F = load_family_file(o.family);
    const auto L = predict_limit(divergence_pattern(F.family), F.S);
    s.emit_json(o.out, report::limit_json(F.family, L));
}

void cmd_polytope(const Options& o, Session& s) {
    s.manifest.config_hash = report::hex64(report::fnv1a(read_bytes(o.family) + "\n" + o.kind + " " + o.k + " " + o.delta));
    const auto F = load_family_file(o.family);
    Rational k;
    try {
        k = parse_rational(o.k);
    } catch (const std::exception&) {
        throw ParseError("--k: expected p/q, got '" + o.k + "'");
    }
    const double delta = parse_number("--delta", o.delta);
    if (!(delta > 0 && delta < 1)) throw ParseError("--delta: must lie in (0,1)");
    const Matrix<Rational> g = F.family.at(k);
    HPolytope H;
    if (o.kind == "omega") {
        H = omega_polytope(g, delta);
    } else if (o.kind == "r") {
        std::optional<std::pair<int, int>> range;
        if (!o.l_range.empty()) {
            if (o.l_range.size() != 2) throw ParseError("--l-range: expected two integers a,b");
            range = std::make_pair(o.l_range[0], o.l_range[1]);
        }
        H = r_polytope(g, delta, range);
    } else {
        throw ParseError("--kind: expected omega or r, got '" + o.kind + "'");
    }
    const auto V = vertices(H);
    auto j = report::polytope_json(o.kind, H, V, inradius(H).r);
    j["family"] = F.family.name;
    j["k"] = to_string(k);
    j["delta"] = delta;
    s.emit_json(o.out, j);
    if (!o.csv.empty()) s.write(o.csv, report::vertices_csv(V));
}

void cmd_equidist(const Options& o, Session& s) {
    s.manifest.config_hash = report::hex64(report::fnv1a(read_bytes(o.config)));
    auto cfg = parse_experiment(load_family_file(o.config));
    if (o.seed) cfg.seed = *o.seed;
    if (o.samples) cfg.samples = *o.samples;
    s.manifest.seed = cfg.seed;

    const auto runs = run_experiment(cfg, o.threads);
    report::EquidistResults r;
    for (const auto& run : runs) r.summaries.push_back(summarize(run));

    std::optional<std::size_t> base;
    for (std::size_t i = 0; i < cfg.observables.size(); ++i) {
        if (cfg.observables[i].kind != Observable::Kind::PointCount) continue;
        if (!base) {
            base = i;
            continue;
        }
        const std::string label = cfg.observables[i].label() + "/" + cfg.observables[*base].label();
        try {
            r.ratios.emplace_back(label, ratio_convergence(runs, i, *base));
        } catch (const DegenerateDenominator& e) {
            std::cerr << "warning: ratio " << label << " skipped: " << e.what() << "\n";
        }
    }
    if (!cfg.escape_r.empty()) r.escape = escape_mass(runs, cfg.escape_r);
    if (graph_of(cfg.family).components().size() > 1) r.blocks = block_factor_test(cfg, o.threads);

    s.emit_json(o.out, report::equidist_json(cfg, r));
    if (!o.csv.empty()) s.write(o.csv, report::equidist_csv(cfg, r.summaries));
    if (!o.svg.empty()) s.write(o.svg, report::svg(report::equidist_plot(cfg, r.summaries)));
}

void cmd_count(const Options& o, Session& s) {
    std::ostringstream canon;
    canon << "count roots=";
    for (auto a : o.roots) canon << a << ",";
    canon << " tmax=" << report::format_double(o.tmax) << " grid=" << o.grid;
    if (o.cx) canon << " cx=" << report::format_double(*o.cx);
    s.manifest.config_hash = report::hex64(report::fnv1a(canon.str()));

    const CharPolyData cp(o.roots);
    if (!(o.tmax > 0)) throw ParseError("--tmax: must be positive");
    if (o.grid < 1) throw ParseError("--grid: must be at least 1");
    std::vector<double> grid;
    for (int i = 1; i <= o.grid; ++i) grid.push_back(o.tmax * i / o.grid);
    std::optional<double> cx = o.cx;
    if (!cx && cp.n() == 2) cx = cx_sl2();
    const auto rep = count_report(cp, grid, cx, o.threads);
    s.emit_json(o.out, report::count_json(rep, cx));
    if (!o.csv.empty()) s.write(o.csv, report::count_csv(rep));
    if (!o.svg.empty()) s.write(o.svg, report::svg(report::count_plot(rep)));
}

void cmd_c0(const Options& o, Session& s) {
    s.manifest.config_hash = report::hex64(report::fnv1a("c0 n=" + std::to_string(o.n)));
    if (o.n < 2 || o.n > 5) throw ParseError("--n: must lie in 2..5");
    const double h = c0_volume(o.n, Measure::Hausdorff), c = c0_volume(o.n, Measure::Coordinate);
    std::cout << "c0(n=" << o.n << ") hausdorff " << report::format_double(h) << "\n"
              << "c0(n=" << o.n << ") coordinate " << report::format_double(c) << "\n";
    if (!o.out.empty())
        s.write(o.out, report::to_json_text({{"schema", report::schema("c0")}, {"n", o.n}, {"hausdorff", h}, {"coordinate", c}}));
}

void cmd_certify(const Options& o, Session& s) {
    s.manifest.config_hash = report::hex64(report::fnv1a(read_bytes(o.family)));
    const auto F = load_family_file(o.family);
    const auto G = graph_of(F.family);
    const auto x = uds_certificate(G);
    json uds = json::array();
    for (const auto& I : uds_subsets(G)) uds.push_back(I.indices());
    json edges = json::array();
    for (auto [i, j] : G.edges()) edges.push_back({i, j});
    s.emit_json(o.out, {{"schema", report::schema("certify")},
                        {"family", F.family.name},
                        {"n", G.n},
                        {"edges", edges},
                        {"uds", uds},
                        {"certificate", report::vector_json(x)},
                        {"verified", verify_certificate(G, x)}});
}

std::string version_text() {
    std::string s = std::string("orbitkit ") + report::kVersion + "\nschemas:";
    for (const auto& c : report::kCommands) s += " " + report::schema(c);
    return s + " orbitkit/manifest/1";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"orbitkit: divergent diagonal orbits, their polytopes, equidistribution and matrix counting"};
    app.set_version_flag("--version", version_text());
    app.require_subcommand(1);
    Options o;
    Session session;
    app.add_option("--seed", o.seed, "RNG seed (overrides the config seed)");
    app.add_option("--threads", o.threads, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
    app.add_option("--manifest", session.manifest_path, "run manifest path");

    auto* predict = app.add_subcommand("predict", "limit description of a family");
    predict->add_option("--family", o.family)->required();
    predict->add_option("--out", o.out);

    auto* polytope = app.add_subcommand("polytope", "Omega or R polytope of g(k)");
    polytope->add_option("--family", o.family)->required();
    polytope->add_option("--k", o.k, "k as p/q")->capture_default_str();
    polytope->add_option("--delta", o.delta)->capture_default_str();
    polytope->add_option("--kind", o.kind, "omega or r")->capture_default_str();
    polytope->add_option("--l-range", o.l_range, "wedge degrees a,b for the R polytope")->delimiter(',');
    polytope->add_option("--out", o.out);
    polytope->add_option("--csv", o.csv, "vertex table");

    auto* equidist = app.add_subcommand("equidist", "push-sample experiment");
    equidist->add_option("--config", o.config)->required();
    equidist->add_option("--samples", o.samples, "override experiment.samples");
    equidist->add_option("--out", o.out);
    equidist->add_option("--csv", o.csv, "columns k,observable,mean,stderr,n_samples");
    equidist->add_option("--svg", o.svg, "trend plot");

    auto* count = app.add_subcommand("count", "integer matrices with a prescribed characteristic polynomial");
    count->add_option("--roots", o.roots)->required()->delimiter(',');
    count->add_option("--tmax", o.tmax)->required();
    count->add_option("--grid", o.grid, "number of equally spaced T values up to tmax")->capture_default_str();
    count->add_option("--cx", o.cx, "volume of X; defaults to the computed SL(2) value when n = 2");
    count->add_option("--out", o.out);
    count->add_option("--csv", o.csv, "columns T,count,predicted,ratio");
    count->add_option("--svg", o.svg, "count vs T, log-log");

    auto* c0 = app.add_subcommand("c0", "volume of the counting polytope in both normalizations");
    c0->add_option("--n", o.n)->capture_default_str();
    c0->add_option("--out", o.out);

    auto* certify = app.add_subcommand("certify", "UDS certificate for the pattern graph of a family");
    certify->add_option("--family", o.family)->required();
    certify->add_option("--out", o.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const auto* sub = app.get_subcommands().front();
    session.manifest.command = sub->get_name();
    session.manifest.seed = o.seed.value_or(0);
    session.manifest.started = report::utc_timestamp();

    int code = Ok;
    try {
        if (sub == predict) cmd_predict(o, session);
        else if (sub == polytope) cmd_polytope(o, session);
        else if (sub == equidist) cmd_equidist(o, session);
        else if (sub == count) cmd_count(o, session);
        else if (sub == c0) cmd_c0(o, session);
        else cmd_certify(o, session);
    } catch (const ParseError& e) {
        std::cerr << "bad config: " << e.what() << "\n";
        code = BadConfig;
    } catch (const CapExceeded& e) {
        std::cerr << "scale cap exceeded: " << e.what() << "\n";
        code = Cap;
    } catch (const EmptyPolytope& e) {
        std::cerr << "degenerate geometry: " << e.what() << "\n";
        code = Degenerate;
    } catch (const UnboundedPolytope& e) {
        std::cerr << "degenerate geometry: " << e.what() << "\n";
        code = Degenerate;
    } catch (const std::invalid_argument& e) {
        std::cerr << "bad config: " << e.what() << "\n";
        code = BadConfig;
    } catch (const std::logic_error& e) {
        std::cerr << "bad config: " << e.what() << "\n";
        code = BadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        code = Failure;
    }
    try {
        session.finish();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (code == Ok) code = Failure;
    }
    return code;
}
