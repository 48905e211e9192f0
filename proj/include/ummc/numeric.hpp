#ifndef UMMC_NUMERIC_HPP
#define UMMC_NUMERIC_HPP

#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

namespace ummc {

// Compensated accumulator for long probability sums.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

inline double kahan_total(const std::vector<double>& xs) {
    KahanSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

// Probabilities are printed with 17 significant digits so that parsing
// the text recovers the exact double.
inline std::string format_probability(double p) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", p);
    return buf;
}

inline std::string format_table_value(double p) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", p);
    return buf;
}

constexpr double kProbTolerance = 1e-12;

}  // namespace ummc

#endif
