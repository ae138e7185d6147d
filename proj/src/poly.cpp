#include "diffwarn/poly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diffwarn/csv.hpp"

namespace diffwarn::reach {

Polynomial Polynomial::constant(int nvars, double c) {
    Polynomial p(nvars);
    p.add_term(std::vector<int>(nvars, 0), c);
    return p;
}

Polynomial Polynomial::variable(int nvars, int index, double coeff) {
    if (index < 0 || index >= nvars)
        throw std::invalid_argument("polynomial: variable index out of range");
    Polynomial p(nvars);
    std::vector<int> e(nvars, 0);
    e[index] = 1;
    p.add_term(std::move(e), coeff);
    return p;
}

void Polynomial::add_term(std::vector<int> exponents, double coefficient) {
    if (static_cast<int>(exponents.size()) != nvars_)
        throw std::invalid_argument("polynomial: exponent tuple arity mismatch");
    for (int e : exponents)
        if (e < 0) throw std::invalid_argument("polynomial: negative exponent");
    if (!std::isfinite(coefficient))
        throw std::invalid_argument("polynomial: non-finite coefficient");
    if (coefficient == 0.0) return;
    for (auto& t : terms_) {
        if (t.exponents == exponents) {
            t.coefficient += coefficient;
            if (t.coefficient == 0.0) {
                t = terms_.back();
                terms_.pop_back();
            }
            return;
        }
    }
    terms_.push_back({std::move(exponents), coefficient});
}

double Polynomial::eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != nvars_)
        throw std::invalid_argument("polynomial: evaluation point arity mismatch");
    double acc = 0.0;
    for (const auto& t : terms_) {
        double v = t.coefficient;
        for (int i = 0; i < nvars_; ++i) {
            for (int k = 0; k < t.exponents[i]; ++k) v *= x[i];
        }
        acc += v;
    }
    return acc;
}

Polynomial Polynomial::derivative(int var) const {
    if (var < 0 || var >= nvars_)
        throw std::invalid_argument("polynomial: derivative index out of range");
    Polynomial d(nvars_);
    for (const auto& t : terms_) {
        if (t.exponents[var] == 0) continue;
        std::vector<int> e = t.exponents;
        const double c = t.coefficient * e[var];
        --e[var];
        d.add_term(std::move(e), c);
    }
    return d;
}

int Polynomial::degree() const {
    int deg = 0;
    for (const auto& t : terms_) {
        int d = 0;
        for (int e : t.exponents) d += e;
        deg = std::max(deg, d);
    }
    return deg;
}

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i) s += " + ";
        s += fmt_double(terms_[i].coefficient);
        for (int v = 0; v < nvars_; ++v) {
            if (terms_[i].exponents[v] == 0) continue;
            s += "*x" + std::to_string(v);
            if (terms_[i].exponents[v] > 1)
                s += "^" + std::to_string(terms_[i].exponents[v]);
        }
    }
    return s;
}

}  // namespace diffwarn::reach
