#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace pinnelast::oracle {

struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Relative l2 discrepancy over paired (possibly vector-valued) samples:
/// sqrt(sum ||pred_i - ref_i||^2) / sqrt(sum ||ref_i||^2).
inline double relative_l2(std::span<const double> pred, std::span<const double> ref,
                          std::size_t components = 1) {
    if (pred.size() != ref.size())
        throw MetricError("relative_l2: sample counts differ");
    if (ref.empty()) throw MetricError("relative_l2: empty reference");
    (void)components;  // layout is flat; components only document intent
    double num = 0, den = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double d = pred[i] - ref[i];
        num += d * d;
        den += ref[i] * ref[i];
    }
    if (den == 0.0) throw MetricError("relative_l2: reference field has zero norm");
    return std::sqrt(num) / std::sqrt(den);
}

inline double relative_l2(const std::vector<double>& pred, const std::vector<double>& ref) {
    return relative_l2(std::span<const double>(pred), std::span<const double>(ref));
}

}  // namespace pinnelast::oracle
