#pragma once

#include "orbitkit/rational.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace orbitkit {

// Univariate polynomial in the family parameter k; coeffs[i] multiplies k^i.
template <class T>
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(int c) : Polynomial(T(c)) {}
    Polynomial(const T& c) {
        if (c != T(0)) coeffs_.push_back(c);
    }
    explicit Polynomial(std::vector<T> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

    static Polynomial monomial(const T& c, int power) {
        std::vector<T> v(power + 1, T(0));
        v[power] = c;
        return Polynomial(std::move(v));
    }

    // -1 for the zero polynomial.
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }
    bool is_constant() const { return coeffs_.size() <= 1; }
    const std::vector<T>& coeffs() const { return coeffs_; }

    T coeff(int i) const {
        return (i >= 0 && i < static_cast<int>(coeffs_.size())) ? coeffs_[i] : T(0);
    }
    T leading() const { return coeffs_.empty() ? T(0) : coeffs_.back(); }
    T constant_term() const { return coeff(0); }

    template <class U>
    U eval(const U& k) const {
        U acc(0);
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * k + U(*it);
        return acc;
    }

    Polynomial& operator+=(const Polynomial& o) {
        if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), T(0));
        for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        trim();
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), T(0));
        for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        trim();
        return *this;
    }
    Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator-(Polynomial a) {
        for (auto& c : a.coeffs_) c = -c;
        return a;
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return Polynomial();
        std::vector<T> v(a.coeffs_.size() + b.coeffs_.size() - 1, T(0));
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) v[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return Polynomial(std::move(v));
    }
    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }
    friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

    std::string str() const {
        if (coeffs_.empty()) return "0";
        std::string out;
        for (int i = degree(); i >= 0; --i) {
            if (coeffs_[i] == T(0)) continue;
            if (!out.empty()) out += " + ";
            out += "(" + to_string(coeffs_[i]) + ")";
            if (i >= 1) out += "k";
            if (i >= 2) out += "^" + std::to_string(i);
        }
        return out;
    }

private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back() == T(0)) coeffs_.pop_back();
    }

    std::vector<T> coeffs_;
};

using RationalPolynomial = Polynomial<Rational>;

} // namespace orbitkit
