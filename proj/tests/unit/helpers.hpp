// Small deterministic generators and distances shared by the unit suites.
#pragma once

#include <random>

#include "cpdil/kraus.hpp"
#include "cpdil/linalg.hpp"

namespace helpers {

using cpdil::Complex;
using cpdil::KrausFamily;
using cpdil::Matrix;
using cpdil::Vector;

inline double dist(const Matrix& a, const Matrix& b) { return (a - b).norm(); }

inline Matrix matrix_unit(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
    Matrix e = Matrix::Zero(d, d);
    e(i, j) = 1.0;
    return e;
}

inline Matrix random_unitary(Eigen::Index d, std::mt19937_64& rng) {
    const Matrix g = cpdil::random_gaussian(d, d, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(d, d);
}

// Orthonormal columns: rows x cols slice of a random unitary, rows >= cols.
inline Matrix random_isometry(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    return random_unitary(rows, rng).leftCols(cols);
}

inline Matrix random_contraction(Eigen::Index d, std::mt19937_64& rng) {
    const Matrix g = cpdil::random_gaussian(d, d, rng);
    return g / (cpdil::operator_norm(g) + 0.25);
}

inline Matrix random_psd(Eigen::Index d, std::mt19937_64& rng) {
    const Matrix g = cpdil::random_gaussian(d, d, rng);
    return g * g.adjoint();
}

// Partial isometry rows x cols of the given rank.
inline Matrix random_partial_isometry(Eigen::Index rows, Eigen::Index cols,
                                      Eigen::Index rank, std::mt19937_64& rng) {
    const Matrix w = random_isometry(rows, rank, rng);
    const Matrix q = random_isometry(cols, rank, rng);
    return w * q.adjoint();
}

// Family of `count` random d x d operators scaled to a strict row contraction.
inline KrausFamily random_family(Eigen::Index d, Eigen::Index count,
                                 std::mt19937_64& rng) {
    KrausFamily fam;
    fam.d = d;
    Matrix row(d, count * d);
    for (Eigen::Index i = 0; i < count; ++i) {
        fam.ops.push_back(cpdil::random_gaussian(d, d, rng));
        row.middleCols(i * d, d) = fam.ops.back();
    }
    const double scale = 1.0 / (cpdil::operator_norm(row) + 0.25);
    for (auto& op : fam.ops) op *= scale;
    return fam;
}

}  // namespace helpers
