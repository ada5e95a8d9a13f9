#include "hmp/finite_diff.hpp"

#include <numeric>

namespace hmp {

FdReport finite_difference_check(const ScalarFn& f, const Vector& params,
                                 const Vector& analytic_grad, double step,
                                 const std::vector<Index>& indices) {
    if (step <= 0.0) {
        throw ContractError("finite_difference_check: step must be positive");
    }
    if (analytic_grad.size() != params.size()) {
        throw DimensionError("finite_difference_check: gradient size mismatch");
    }
    for (Index i : indices) {
        if (i < 0 || i >= params.size()) {
            throw ContractError("finite_difference_check: index " + std::to_string(i) +
                                " out of range");
        }
    }
    FdReport report;
    Vector probe = params;
    for (Index i : indices) {
        probe(i) = params(i) + step;
        const double fp = f(probe);
        probe(i) = params(i) - step;
        const double fm = f(probe);
        probe(i) = params(i);
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw EvaluationError("finite_difference_check: non-finite value at index " +
                                  std::to_string(i));
        }
        const double numeric = (fp - fm) / (2.0 * step);
        const double analytic = analytic_grad(i);
        const double rel =
            std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_index = i;
            report.worst_analytic = analytic;
            report.worst_numeric = numeric;
        }
    }
    return report;
}

FdReport finite_difference_check(const ScalarFn& f, const Vector& params,
                                 const Vector& analytic_grad, double step) {
    std::vector<Index> all(static_cast<size_t>(params.size()));
    std::iota(all.begin(), all.end(), Index{0});
    return finite_difference_check(f, params, analytic_grad, step, all);
}

}  // namespace hmp
