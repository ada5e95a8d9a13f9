#include <doctest.h>

#include <cmath>
#include <random>

#include "hmp/linalg.hpp"
#include "test_util.hpp"

using namespace hmp;

TEST_CASE("dct basis is orthonormal for representative sizes") {
    for (Index t : {Index(1), Index(2), Index(10), Index(50)}) {
        const DctBasis basis = dct_basis(t);
        CHECK(basis.size == t);
        const Matrix gram = basis.forward * basis.forward.transpose();
        const double dev = (gram - Matrix::Identity(t, t)).cwiseAbs().maxCoeff();
        CHECK(dev < 1e-10);
        CHECK(basis.inverse == basis.forward.transpose());
    }
}

TEST_CASE("size-1 basis is the identity") {
    const DctBasis basis = dct_basis(1);
    CHECK(basis.forward(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("constant signal maps to the zero-frequency row only") {
    const DctBasis basis = dct_basis(8);
    const Matrix x = Matrix::Constant(8, 1, 3.0);
    const Matrix y = apply_dct(basis, x);
    // Row 0 carries sqrt(T) * mean; every other coefficient vanishes.
    CHECK(y(0, 0) == doctest::Approx(3.0 * std::sqrt(8.0)).epsilon(1e-12));
    CHECK(y.bottomRows(7).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("round trip restores the signal") {
    std::mt19937_64 g(42);
    const DctBasis basis = dct_basis(50);
    const Matrix x = testutil::random_matrix(g, 50, 27);
    const Matrix back = apply_idct(basis, apply_dct(basis, x));
    CHECK((back - x).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("parseval: energy is preserved") {
    std::mt19937_64 g(7);
    const DctBasis basis = dct_basis(50);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix x = testutil::random_matrix(g, 50, 3);
        const Matrix y = apply_dct(basis, x);
        CHECK(std::abs(x.squaredNorm() - y.squaredNorm()) < 1e-9);
    }
}

TEST_CASE("transform is linear") {
    std::mt19937_64 g(3);
    const DctBasis basis = dct_basis(10);
    const Matrix a = testutil::random_matrix(g, 10, 4);
    const Matrix b = testutil::random_matrix(g, 10, 4);
    const Matrix lhs = apply_dct(basis, Matrix(2.0 * a - 3.0 * b));
    const Matrix rhs = 2.0 * apply_dct(basis, a) - 3.0 * apply_dct(basis, b);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero input stays zero") {
    const DctBasis basis = dct_basis(16);
    const Matrix y = apply_dct(basis, Matrix::Zero(16, 5));
    CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invalid sizes and mismatched shapes throw") {
    CHECK_THROWS_AS(dct_basis(0), DimensionError);
    CHECK_THROWS_AS(dct_basis(-3), DimensionError);
    const DctBasis basis = dct_basis(10);
    CHECK_THROWS_AS(apply_dct(basis, Matrix::Zero(9, 2)), DimensionError);
    CHECK_THROWS_AS(apply_idct(basis, Matrix::Zero(11, 2)), DimensionError);
}
