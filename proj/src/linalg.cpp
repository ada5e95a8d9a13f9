#include "hmp/linalg.hpp"

#include <cmath>

namespace hmp {

DctBasis dct_basis(Index t) {
    if (t < 1) {
        throw DimensionError("dct_basis: size must be >= 1, got " + std::to_string(t));
    }
    DctBasis basis;
    basis.size = t;
    basis.forward.resize(t, t);
    const double pi = std::acos(-1.0);
    const double scale = std::sqrt(2.0 / static_cast<double>(t));
    for (Index k = 0; k < t; ++k) {
        const double sk = (k == 0) ? 1.0 / std::sqrt(2.0) : 1.0;
        for (Index n = 0; n < t; ++n) {
            basis.forward(k, n) =
                sk * scale * std::cos(pi * (2.0 * n + 1.0) * k / (2.0 * t));
        }
    }
    basis.inverse = basis.forward.transpose();
    return basis;
}

}  // namespace hmp
