#pragma once

#include <functional>
#include <span>
#include <vector>

namespace diffwarn::micro {

// Threshold decision model for one agent: nonnegative social weights over the
// other agents' choices, a decision threshold on the resulting signal, and an
// inherent preference that callers may fold into the threshold.
struct DecisionModel {
    std::vector<double> weights;  // all >= 0
    double threshold = 0.0;       // s*
    double preference = 0.0;      // A_i; stored, applied via threshold offsets

    double weight_budget() const;  // b_i = sum of weights
    void validate() const;
};

// s_i = o . w_i over binary choices o
double social_signal(std::span<const int> choices, std::span<const double> weights);

// 1 iff signal >= threshold (boundary chooses option 1)
int threshold_decide(double signal, const DecisionModel& model);

// argmax over options of p1*u(o, w1) + (1-p1)*u(o, w0); ties resolve to 1,
// matching the threshold rule's boundary convention. utilities[o][w].
int expected_utility_decide(double p1, const double (&utilities)[2][2]);

// Probabilistic decision: a monotone map from signal to adoption probability.
// The default rule is the hard threshold of threshold_decide.
using DecisionRule = std::function<double(double signal)>;
DecisionRule hard_threshold_rule(const DecisionModel& model);
double decision_probability(double signal, const DecisionRule& rule);

}  // namespace diffwarn::micro
