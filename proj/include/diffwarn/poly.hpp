#pragma once

#include <span>
#include <string>
#include <vector>

namespace diffwarn::reach {

// Dense-coefficient multivariate polynomial: a list of (exponent tuple,
// coefficient) terms over a fixed variable count. Small degrees, small
// dimension; evaluation and symbolic differentiation are all that is needed.
struct Term {
    std::vector<int> exponents;
    double coefficient = 0.0;
};

class Polynomial {
  public:
    Polynomial() = default;
    explicit Polynomial(int nvars) : nvars_(nvars) {}

    static Polynomial constant(int nvars, double c);
    static Polynomial variable(int nvars, int index, double coeff = 1.0);

    void add_term(std::vector<int> exponents, double coefficient);

    double eval(std::span<const double> x) const;
    Polynomial derivative(int var) const;

    int nvars() const { return nvars_; }
    int degree() const;
    bool empty() const { return terms_.empty(); }
    const std::vector<Term>& terms() const { return terms_; }

    std::string to_string() const;

  private:
    int nvars_ = 0;
    std::vector<Term> terms_;
};

}  // namespace diffwarn::reach
