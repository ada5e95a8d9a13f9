#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "hmp/errors.hpp"
#include "hmp/linalg.hpp"

namespace hmp {

// Result of comparing an analytic gradient against central differences.
struct FdReport {
    double max_rel_error = 0.0;
    Index worst_index = -1;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

using ScalarFn = std::function<double(const Vector&)>;

// Central-difference check of `analytic_grad` against f around `params`,
// restricted to `indices`. Relative error per entry is
// |analytic - numeric| / max(1, |analytic|).
FdReport finite_difference_check(const ScalarFn& f, const Vector& params,
                                 const Vector& analytic_grad, double step,
                                 const std::vector<Index>& indices);

// Exhaustive variant over every parameter.
FdReport finite_difference_check(const ScalarFn& f, const Vector& params,
                                 const Vector& analytic_grad, double step);

}  // namespace hmp
