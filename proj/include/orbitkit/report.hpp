#pragma once

#include "orbitkit/counting.hpp"
#include "orbitkit/equidist.hpp"
#include "orbitkit/r_polytope.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <json.hpp>

namespace orbitkit::report {

inline constexpr const char* kVersion = "1.0.0";
inline const std::vector<std::string> kCommands = {"predict", "polytope", "equidist", "count", "c0", "certify"};

inline std::string schema(const std::string& command) { return "orbitkit/" + command + "/1"; }

// 17 significant digits, locale independent; non-finite values have no JSON spelling and become null.
inline std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

namespace detail {

inline void dump(const nlohmann::json& j, std::string& out, int level) {
    const std::string pad(2 * (level + 1), ' '), close(2 * level, ' ');
    switch (j.type()) {
    case nlohmann::json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + nlohmann::json(it.key()).dump() + ": ";
            dump(it.value(), out, level + 1);
        }
        out += "\n" + close + "}";
        return;
    }
    case nlohmann::json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        bool scalars = true;
        for (const auto& e : j) scalars = scalars && !e.is_structured();
        if (scalars) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ", ";
                dump(j[i], out, level + 1);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            out += pad;
            dump(j[i], out, level + 1);
        }
        out += "\n" + close + "]";
        return;
    }
    case nlohmann::json::value_t::number_float: out += format_double(j.get<double>()); return;
    default: out += j.dump();
    }
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

} // namespace detail

inline std::string to_json_text(const nlohmann::json& j) {
    std::string out;
    detail::dump(j, out, 0);
    return out + "\n";
}

inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp = std::chrono::system_clock::now()) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::string command;
    std::string config_hash;  // FNV-1a 64 of the raw config bytes, or of the canonical argument string
    std::uint64_t seed = 0;
    std::string version = kVersion;
    std::string started;
    std::string finished;
    std::vector<std::string> outputs;

    nlohmann::json to_json() const {
        return {{"schema", "orbitkit/manifest/1"}, {"command", command}, {"config_hash", config_hash},
                {"seed", seed},                    {"version", version}, {"started", started},
                {"finished", finished},            {"outputs", outputs}};
    }
    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.version = j.at("version").get<std::string>();
        m.started = j.at("started").get<std::string>();
        m.finished = j.at("finished").get<std::string>();
        m.outputs = j.at("outputs").get<std::vector<std::string>>();
        return m;
    }
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << content;
    if (!f.flush()) throw std::runtime_error("cannot write " + path);
}

// ---- JSON payloads

template <class T>
nlohmann::json vector_json(const std::vector<T>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& x : v) {
        if constexpr (std::is_same_v<T, Rational>) a.push_back(to_string(x));
        else a.push_back(x);
    }
    return a;
}

inline nlohmann::json lie_json(const RationalLieAVector& v) { return vector_json(v.t); }
inline nlohmann::json lie_json(const LieAVector& v) { return vector_json(v.t); }

inline nlohmann::json limit_json(const PolyFamily& F, const LimitDescription& L) {
    nlohmann::json basis = nlohmann::json::array();
    for (const auto& b : L.basisA) basis.push_back(lie_json(b));
    return {{"schema", schema("predict")}, {"family", F.name},         {"n", F.n},
            {"components", L.components}, {"blocks", L.blocks},        {"blockSizes", L.blockSizes},
            {"centerDim", L.centerDim},   {"basisA", basis},           {"haar", L.haar}};
}

inline nlohmann::json polytope_json(const std::string& kind, const HPolytope& H, const VPolytope& V, double inr) {
    nlohmann::json cons = nlohmann::json::array();
    for (const auto& c : H.constraints) cons.push_back({{"label", c.label}, {"a", c.a}, {"b", c.b}});
    nlohmann::json verts = nlohmann::json::array();
    for (const auto& v : V.vertices) verts.push_back(lie_json(v));
    const double vol = volume(V);
    return {{"schema", schema("polytope")},
            {"kind", kind},
            {"n", H.n},
            {"dim", V.dim},
            {"constraints", cons},
            {"vertices", verts},
            {"volume", vol},
            {"volume_coordinate", volume(V, Measure::Coordinate)},
            {"area", V.dim == H.n - 1 ? surface_area(V) : 0.0},
            {"inradius", inr}};
}

// Columns: vertex, t1..tn
inline std::string vertices_csv(const VPolytope& V) {
    std::string s = "vertex";
    for (int i = 1; i <= V.n; ++i) s += ",t" + std::to_string(i);
    s += "\n";
    for (std::size_t v = 0; v < V.vertices.size(); ++v) {
        s += std::to_string(v);
        for (double x : V.vertices[v].t) s += "," + format_double(x);
        s += "\n";
    }
    return s;
}

struct EquidistResults {
    std::vector<KSummary> summaries;
    std::vector<std::pair<std::string, std::vector<RatioPoint>>> ratios;
    std::vector<EscapeCurve> escape;
    std::optional<std::vector<BlockKReport>> blocks;
};

inline nlohmann::json moments_json(const Moments& m) {
    return {{"mean", m.mean}, {"stderr", m.stderr_}, {"variance", m.variance}};
}

inline nlohmann::json equidist_json(const ExperimentConfig& cfg, const EquidistResults& r) {
    const int n = cfg.family.n;
    nlohmann::json obs = nlohmann::json::array();
    for (const auto& o : cfg.observables) {
        nlohmann::json e = {{"label", o.label()}};
        if (o.kind == Observable::Kind::PointCount) e["siegel"] = siegel_oracle(n, o.r);
        obs.push_back(e);
    }
    nlohmann::json ks = nlohmann::json::array();
    for (const auto& s : r.summaries) {
        nlohmann::json m = nlohmann::json::array();
        for (const auto& x : s.observables) m.push_back(moments_json(x));
        ks.push_back({{"k", s.k}, {"omega_volume", s.omega_volume}, {"lambda_k", s.lambda_k}, {"samples", s.samples},
                      {"observables", m}, {"covariance", s.covariance}});
    }
    nlohmann::json ratios = nlohmann::json::array();
    for (const auto& [label, pts] : r.ratios) {
        nlohmann::json p = nlohmann::json::array();
        for (const auto& x : pts) p.push_back({{"k", x.k}, {"ratio", x.ratio}, {"stderr", x.stderr_}});
        ratios.push_back({{"label", label}, {"points", p}});
    }
    nlohmann::json esc = nlohmann::json::array();
    for (const auto& c : r.escape) esc.push_back({{"k", c.k}, {"r", c.r}, {"fraction", c.fraction}});
    nlohmann::json j = {{"schema", schema("equidist")},
                        {"family", cfg.family.name},
                        {"n", n},
                        {"delta", cfg.delta},
                        {"seed", cfg.seed},
                        {"samples", cfg.samples},
                        {"observables", obs},
                        {"k", ks},
                        {"ratios", ratios},
                        {"escape", esc}};
    if (r.blocks) {
        nlohmann::json b = nlohmann::json::array();
        for (const auto& rep : *r.blocks) {
            nlohmann::json parts = nlohmann::json::array();
            for (const auto& x : rep.blocks)
                parts.push_back({{"block", x.block}, {"siegel", x.siegel}, {"pointCount", moments_json(x.point_count)},
                                 {"logCovolume", moments_json(x.log_covolume)}});
            b.push_back({{"k", rep.k}, {"samples", rep.samples}, {"split_exact", rep.split_exact}, {"blocks", parts}});
        }
        j["block_r"] = cfg.block_r;
        j["blocks"] = b;
    }
    return j;
}

// Columns: k, observable, mean, stderr, n_samples
inline std::string equidist_csv(const ExperimentConfig& cfg, const std::vector<KSummary>& summaries) {
    std::string s = "k,observable,mean,stderr,n_samples\n";
    for (const auto& k : summaries)
        for (std::size_t o = 0; o < cfg.observables.size(); ++o)
            s += std::to_string(k.k) + "," + detail::csv_field(cfg.observables[o].label()) + "," +
                 format_double(k.observables[o].mean) + "," + format_double(k.observables[o].stderr_) + "," +
                 std::to_string(k.samples) + "\n";
    return s;
}

inline nlohmann::json count_json(const CountReport& r, std::optional<double> cX) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < r.T.size(); ++i) {
        nlohmann::json row = {{"T", r.T[i]}, {"count", r.counts[i]}};
        if (!r.predicted.empty()) {
            row["predicted"] = r.predicted[i];
            row["ratio"] = r.ratio[i];
        }
        rows.push_back(row);
    }
    nlohmann::json j = {{"schema", schema("count")},
                        {"roots", r.roots},
                        {"rows", rows},
                        {"law", {{"slope", r.law.slope}, {"intercept", r.law.intercept}, {"r2", r.law.r2}}},
                        {"loglog", {{"slope", r.loglog.slope}, {"intercept", r.loglog.intercept}, {"r2", r.loglog.r2}}}};
    if (cX) j["cX"] = *cX;
    return j;
}

// Columns: T, count, predicted, ratio (the last two are empty without cX)
inline std::string count_csv(const CountReport& r) {
    std::string s = "T,count,predicted,ratio\n";
    for (std::size_t i = 0; i < r.T.size(); ++i) {
        s += format_double(r.T[i]) + "," + std::to_string(r.counts[i]) + ",";
        if (!r.predicted.empty()) s += format_double(r.predicted[i]) + "," + format_double(r.ratio[i]);
        else s += ",";
        s += "\n";
    }
    return s;
}

// ---- SVG line plots

struct Series {
    std::string name;
    std::vector<double> x, y;
};

struct Plot {
    std::string title, xlabel, ylabel;
    bool logx = false, logy = false;
    std::vector<Series> series;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
        case '&': o += "&amp;"; break;
        case '<': o += "&lt;"; break;
        case '>': o += "&gt;"; break;
        case '"': o += "&quot;"; break;
        default: o += c;
        }
    }
    return o;
}

inline std::string fmt(double v, int prec = 6) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, prec);
    return std::string(buf, res.ptr);
}

inline std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

struct Axis {
    bool log = false;
    double lo = 0, hi = 1;

    double map(double v) const { return log ? std::log10(v) : v; }
    double frac(double v) const { return (map(v) - lo) / (hi - lo); }

    std::vector<double> ticks() const {
        std::vector<double> t;
        if (log) {
            for (int e = static_cast<int>(std::ceil(lo - 1e-9)); e <= static_cast<int>(std::floor(hi + 1e-9)); ++e)
                t.push_back(std::pow(10.0, e));
            if (t.size() < 2) t = {std::pow(10.0, lo), std::pow(10.0, hi)};
            return t;
        }
        const double span = hi - lo, raw = span / 6, mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * span; v += step)
            t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
        return t;
    }
};

inline Axis make_axis(const std::vector<double>& vals, bool log) {
    Axis a;
    a.log = log;
    double lo = INFINITY, hi = -INFINITY;
    for (double v : vals) {
        if (!std::isfinite(v) || (log && v <= 0)) continue;
        lo = std::min(lo, a.map(v));
        hi = std::max(hi, a.map(v));
    }
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) {
        const double pad = log ? 0.5 : std::max(1.0, std::abs(lo) * 0.1);
        lo -= pad, hi += pad;
    } else if (!log) {
        const double pad = 0.05 * (hi - lo);
        lo -= pad, hi += pad;
    }
    a.lo = lo, a.hi = hi;
    return a;
}

} // namespace detail

inline std::string svg(const Plot& p) {
    constexpr double W = 720, H = 440, L = 80, R = 200, T = 40, B = 60;
    const double pw = W - L - R, ph = H - T - B;
    const std::vector<std::string> palette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
    std::vector<double> xs, ys;
    for (const auto& s : p.series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        ys.insert(ys.end(), s.y.begin(), s.y.end());
    }
    const auto ax = detail::make_axis(xs, p.logx), ay = detail::make_axis(ys, p.logy);
    auto X = [&](double v) { return L + pw * ax.frac(v); };
    auto Y = [&](double v) { return T + ph * (1 - ay.frac(v)); };
    using detail::px;
    using detail::xml_escape;

    std::string o;
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(W) + "\" height=\"" + px(H) + "\" viewBox=\"0 0 " +
         px(W) + " " + px(H) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect x=\"0\" y=\"0\" width=\"" + px(W) + "\" height=\"" + px(H) + "\" fill=\"white\"/>\n";
    o += "<text class=\"title\" x=\"" + px(L + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         xml_escape(p.title) + "</text>\n";
    o += "<rect x=\"" + px(L) + "\" y=\"" + px(T) + "\" width=\"" + px(pw) + "\" height=\"" + px(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ax.ticks()) {
        const double x = X(t);
        o += "<line x1=\"" + px(x) + "\" y1=\"" + px(T + ph) + "\" x2=\"" + px(x) + "\" y2=\"" + px(T + ph + 5) +
             "\" stroke=\"black\"/>\n";
        o += "<text x=\"" + px(x) + "\" y=\"" + px(T + ph + 18) + "\" text-anchor=\"middle\">" + detail::fmt(t) +
             "</text>\n";
    }
    for (double t : ay.ticks()) {
        const double y = Y(t);
        o += "<line x1=\"" + px(L - 5) + "\" y1=\"" + px(y) + "\" x2=\"" + px(L) + "\" y2=\"" + px(y) +
             "\" stroke=\"black\"/>\n";
        o += "<text x=\"" + px(L - 8) + "\" y=\"" + px(y + 4) + "\" text-anchor=\"end\">" + detail::fmt(t) + "</text>\n";
    }
    o += "<text class=\"xlabel\" x=\"" + px(L + pw / 2) + "\" y=\"" + px(H - 18) + "\" text-anchor=\"middle\">" +
         xml_escape(p.xlabel + (p.logx ? " (log)" : "")) + "</text>\n";
    o += "<text class=\"ylabel\" x=\"18\" y=\"" + px(T + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         px(T + ph / 2) + ")\">" + xml_escape(p.ylabel + (p.logy ? " (log)" : "")) + "</text>\n";
    for (std::size_t i = 0; i < p.series.size(); ++i) {
        const auto& s = p.series[i];
        const std::string& col = palette[i % palette.size()];
        std::string pts;
        for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
            if (!std::isfinite(s.x[j]) || !std::isfinite(s.y[j])) continue;
            if ((p.logx && s.x[j] <= 0) || (p.logy && s.y[j] <= 0)) continue;
            if (!pts.empty()) pts += " ";
            pts += px(X(s.x[j])) + "," + px(Y(s.y[j]));
        }
        o += "<polyline class=\"series\" data-name=\"" + xml_escape(s.name) + "\" fill=\"none\" stroke=\"" + col +
             "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
        const double ly = T + 14 + 18 * static_cast<double>(i);
        o += "<line x1=\"" + px(L + pw + 12) + "\" y1=\"" + px(ly - 4) + "\" x2=\"" + px(L + pw + 32) + "\" y2=\"" +
             px(ly - 4) + "\" stroke=\"" + col + "\" stroke-width=\"2\"/>\n";
        o += "<text x=\"" + px(L + pw + 38) + "\" y=\"" + px(ly) + "\">" + xml_escape(s.name) + "</text>\n";
    }
    o += "</svg>\n";
    return o;
}

inline Plot equidist_plot(const ExperimentConfig& cfg, const std::vector<KSummary>& summaries) {
    Plot p{"observable means vs k (" + cfg.family.name + ")", "k", "mean", true, false, {}};
    for (std::size_t o = 0; o < cfg.observables.size(); ++o) {
        Series s{cfg.observables[o].label(), {}, {}};
        for (const auto& k : summaries) {
            s.x.push_back(static_cast<double>(k.k));
            s.y.push_back(k.observables[o].mean);
        }
        p.series.push_back(std::move(s));
    }
    return p;
}

inline Plot count_plot(const CountReport& r) {
    Plot p{"integer matrices with prescribed characteristic polynomial", "T", "count", true, true, {}};
    std::vector<double> c(r.counts.begin(), r.counts.end());
    p.series.push_back({"count", r.T, c});
    if (!r.predicted.empty()) p.series.push_back({"predicted", r.T, r.predicted});
    return p;
}

} // namespace orbitkit::report
