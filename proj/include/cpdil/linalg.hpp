// Dense complex linear algebra kernels: rank/kernel splits, positive square
// roots, partial-isometry extension, deterministic orthonormal completion.
#pragma once

#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <nlohmann/json.hpp>

#include "cpdil/error.hpp"

namespace cpdil {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using Triplet = Eigen::Triplet<Complex>;
using json = nlohmann::json;

// Relative thresholds used throughout: rank_eps drives rank decisions on
// singular values and eigenvalues, accept_eps is the default bound for
// residuals of verified identities.
struct Tolerance {
    double rank_eps = 1e-9;
    double accept_eps = 1e-8;
};

struct KernelRange {
    Matrix kernel;  // cols x k, orthonormal basis of ker(A)
    Matrix range;   // rows x r, orthonormal basis of ran(A)
    Eigen::Index rank = 0;
};

// Splits C^cols = ker(A) + ker(A)^perp via SVD; singular values at or below
// rank_eps * max_singular_value count as zero.
KernelRange kernel_and_range(const Matrix& a, const Tolerance& tol = {});

// Hermitian square root of a positive semidefinite matrix. Eigenvalues in
// [-eps, 0) are clamped to zero, anything lower throws NotPositive.
Matrix psd_sqrt(const Matrix& p, const Tolerance& tol = {});

// Extends a partial isometry t0 by pairing an orthonormal kernel basis with an
// orthonormal cokernel basis in basis order. The result is an isometry when
// dim ker <= dim coker and a coisometry otherwise.
Matrix extend_partial_isometry(const Matrix& t0, const Tolerance& tol = {});

// Deterministic orthonormal basis of ran(q)^perp inside C^dim, for q with
// orthonormal columns (Householder completion, fixed reflector order).
Matrix orthonormal_complement(const Matrix& q, Eigen::Index dim);

Matrix kron(const Matrix& a, const Matrix& b);

// Largest singular value.
double operator_norm(const Matrix& a);

bool is_hermitian(const Matrix& a, double eps = 1e-10);

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

// JSON schema {"rows": r, "cols": c, "data": [[re, im], ...]} row-major.
json matrix_to_json(const Matrix& a);
Matrix matrix_from_json(const json& j);

}  // namespace cpdil
