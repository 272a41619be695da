#pragma once

// Independent reference for the staff-training model: exposure = value * impact,
// a ten-branch ladder table checked in order, sum / 10 saturated at 1, and an
// explicit four-level nested loop over outcomes for the prior-weighted average.

#include <array>
#include <map>
#include <string>

namespace mast::testing {

struct LadderBranch {
    double low;
    bool low_inclusive;
    double high;
    double add;
};

// [1,2] -> 0.5, then each half-open unit step (k,k+1] adds another 0.5.
inline constexpr std::array<LadderBranch, 9> kLadder{{
    {1.0, true, 2.0, 0.5},
    {2.0, false, 3.0, 1.0},
    {3.0, false, 4.0, 1.5},
    {4.0, false, 5.0, 2.0},
    {5.0, false, 6.0, 2.5},
    {6.0, false, 7.0, 3.0},
    {7.0, false, 8.0, 3.5},
    {8.0, false, 9.0, 4.0},
    {9.0, false, 10.0, 4.5},
}};

inline double oracle_contribution(double re) {
    for (const auto& b : kLadder) {
        const bool above = b.low_inclusive ? re >= b.low : re > b.low;
        if (above && re <= b.high) return b.add;
    }
    return 0.0;
}

struct OracleFactor {
    double impact = 0.0;
    std::array<double, 3> values{0.99999, 0.5, 0.00001};  // Probable, Possible, Remote
    std::array<double, 3> prior{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
};

inline double oracle_yes(const std::array<OracleFactor, 4>& f, int a, int b, int c, int d) {
    const int states[4] = {a, b, c, d};
    double total = 0.0;
    for (int i = 0; i < 4; ++i) total += oracle_contribution(f[i].values[states[i]] * f[i].impact);
    total = total / 10.0;
    return total > 1.0 ? 1.0 : total;
}

/// 81 "Yes" entries; the fourth factor varies fastest.
inline std::array<double, 81> oracle_cpt_yes(const std::array<OracleFactor, 4>& f) {
    std::array<double, 81> out{};
    int k = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d) out[k++] = oracle_yes(f, a, b, c, d);
    return out;
}

/// P(Yes | partial evidence); observed[i] = -1 for an unobserved factor.
inline long double oracle_training_probability(const std::array<OracleFactor, 4>& f,
                                               const std::array<int, 4>& observed) {
    long double numerator = 0.0L;
    long double denominator = 0.0L;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d) {
                    const int states[4] = {a, b, c, d};
                    bool consistent = true;
                    long double weight = 1.0L;
                    for (int i = 0; i < 4; ++i) {
                        if (observed[i] >= 0 && observed[i] != states[i]) consistent = false;
                        weight *= f[i].prior[states[i]];
                    }
                    if (!consistent) continue;
                    numerator += weight * oracle_yes(f, a, b, c, d);
                    denominator += weight;
                }
    return numerator / denominator;
}

}  // namespace mast::testing
