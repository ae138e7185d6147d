#include "diffwarn/micro.hpp"

#include <stdexcept>

namespace diffwarn::micro {

double DecisionModel::weight_budget() const {
    double b = 0.0;
    for (double w : weights) b += w;
    return b;
}

void DecisionModel::validate() const {
    for (double w : weights)
        if (w < 0.0) throw std::invalid_argument("decision model: negative weight");
}

double social_signal(std::span<const int> choices, std::span<const double> weights) {
    if (choices.size() != weights.size())
        throw std::invalid_argument("social signal: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < choices.size(); ++i)
        if (choices[i]) s += weights[i];
    return s;
}

int threshold_decide(double signal, const DecisionModel& model) {
    return signal >= model.threshold ? 1 : 0;
}

int expected_utility_decide(double p1, const double (&utilities)[2][2]) {
    if (p1 < 0.0 || p1 > 1.0)
        throw std::invalid_argument("expected utility: p1 must be in [0,1]");
    const double eu0 = p1 * utilities[0][1] + (1.0 - p1) * utilities[0][0];
    const double eu1 = p1 * utilities[1][1] + (1.0 - p1) * utilities[1][0];
    return eu1 >= eu0 ? 1 : 0;
}

DecisionRule hard_threshold_rule(const DecisionModel& model) {
    const double s_star = model.threshold;
    return [s_star](double signal) { return signal >= s_star ? 1.0 : 0.0; };
}

double decision_probability(double signal, const DecisionRule& rule) {
    const double p = rule(signal);
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("decision rule returned probability outside [0,1]");
    return p;
}

}  // namespace diffwarn::micro
