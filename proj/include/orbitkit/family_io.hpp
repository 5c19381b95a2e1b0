#pragma once

#include "orbitkit/families.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

namespace orbitkit {

struct FamilyFile {
    PolyFamily family;
    std::optional<std::vector<RationalLieAVector>> S;
    nlohmann::json experiment;
};

namespace detail {

inline std::string rational_field(const nlohmann::json& j, const std::string& field) {
    if (!j.is_string()) throw ParseError(field + ": expected a string \"p/q\"");
    return j.get<std::string>();
}

inline Rational parse_rational_field(const nlohmann::json& j, const std::string& field) {
    try {
        return parse_rational(rational_field(j, field));
    } catch (const ParseError& e) {
        throw ParseError(field + ": " + e.what());
    }
}

} // namespace detail

// {"name": str, "n": int, "entries": n x n lists of coefficient strings (index = power of k),
//  "S": optional list of trace-zero rows, "experiment": optional object}
inline FamilyFile parse_family_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("family: top level must be an object");
    if (!j.contains("n") || !j["n"].is_number_integer()) throw ParseError("n: missing or not an integer");
    const int n = j["n"].get<int>();
    if (n < 1 || n > kMaxDim) throw ParseError("n: must lie in 1..8");
    if (!j.contains("entries") || !j["entries"].is_array() || j["entries"].size() != static_cast<std::size_t>(n))
        throw ParseError("entries: expected " + std::to_string(n) + " rows");
    PolyMatrix m(n, n);
    for (int r = 0; r < n; ++r) {
        const auto& row = j["entries"][r];
        if (!row.is_array() || row.size() != static_cast<std::size_t>(n))
            throw ParseError("entries[" + std::to_string(r) + "]: expected " + std::to_string(n) + " columns");
        for (int c = 0; c < n; ++c) {
            const std::string field = "entries[" + std::to_string(r) + "][" + std::to_string(c) + "]";
            const auto& cell = row[c];
            if (!cell.is_array()) throw ParseError(field + ": expected a list of coefficients");
            std::vector<Rational> coeffs;
            for (std::size_t p = 0; p < cell.size(); ++p)
                coeffs.push_back(detail::parse_rational_field(cell[p], field + "[" + std::to_string(p) + "]"));
            m(r, c) = RationalPolynomial(std::move(coeffs));
        }
    }
    FamilyFile f;
    f.family = PolyFamily(j.value("name", std::string("family")), std::move(m));
    if (j.contains("S")) {
        if (!j["S"].is_array()) throw ParseError("S: expected a list of vectors");
        std::vector<RationalLieAVector> S;
        for (std::size_t i = 0; i < j["S"].size(); ++i) {
            const std::string field = "S[" + std::to_string(i) + "]";
            const auto& row = j["S"][i];
            if (!row.is_array() || row.size() != static_cast<std::size_t>(n)) throw ParseError(field + ": expected n entries");
            std::vector<Rational> v;
            for (std::size_t c = 0; c < row.size(); ++c)
                v.push_back(detail::parse_rational_field(row[c], field + "[" + std::to_string(c) + "]"));
            try {
                S.emplace_back(std::move(v));
            } catch (const std::invalid_argument&) {
                throw ParseError(field + ": vector must have zero trace");
            }
        }
        f.S = std::move(S);
    }
    if (j.contains("experiment")) f.experiment = j["experiment"];
    return f;
}

inline FamilyFile load_family_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open family file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("family file is not valid JSON: ") + e.what());
    }
    return parse_family_json(j);
}

inline nlohmann::json family_to_json(const PolyFamily& F) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < F.n; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < F.n; ++c) {
            nlohmann::json cell = nlohmann::json::array();
            for (const auto& q : F(r, c).coeffs()) cell.push_back(to_string(q));
            row.push_back(cell);
        }
        rows.push_back(row);
    }
    return {{"name", F.name}, {"n", F.n}, {"entries", rows}};
}

// Example families used throughout the tests and sample configs.
namespace families {

inline PolyFamily unipotent(int n, const std::vector<std::tuple<int, int, RationalPolynomial>>& upper, std::string name) {
    PolyFamily F = PolyFamily::identity(n, std::move(name));
    for (const auto& [i, j, p] : upper) F(i - 1, j - 1) = p;
    return F;
}

inline RationalPolynomial k_pow(const Rational& c, int p) { return RationalPolynomial::monomial(c, p); }

inline PolyFamily example1() {
    return unipotent(3, {{1, 2, k_pow(1, 1)}, {2, 3, k_pow(1, 1)}, {1, 3, k_pow(Rational(1, 2), 2)}}, "ex1");
}
inline PolyFamily example3() {
    return unipotent(4, {{1, 2, k_pow(1, 1)}, {3, 4, k_pow(1, 1)}}, "ex3");
}
inline PolyFamily example4() {
    return unipotent(4, {{1, 2, k_pow(1, 1)}, {2, 3, k_pow(1, 1)}, {1, 3, k_pow(Rational(1, 2), 2)}}, "ex4");
}
inline std::vector<RationalLieAVector> example2_S() {
    return {RationalLieAVector({Rational(1), Rational(1), Rational(-2)})};
}
inline std::vector<RationalLieAVector> example4_S() {
    return {RationalLieAVector({Rational(1), Rational(1), Rational(-2), Rational(0)}),
            RationalLieAVector({Rational(1), Rational(1), Rational(0), Rational(-2)})};
}

} // namespace families

} // namespace orbitkit
