// Completely positive maps on d x d matrices presented by Kraus familes:
// application, Choi matrices, canonical reduction, composition, and the
// commutation residual used as the equality test for CP maps.
#pragma once

#include <vector>

#include "cpdil/linalg.hpp"

namespace cpdil {

// Kraus presentation of a CP map a -> sum_i ops[i] * a * ops[i]^*.
// An empty ops list is the distinguished presentation of the zero map.
struct KrausFamily {
    Eigen::Index d = 0;
    std::vector<Matrix> ops;

    Eigen::Index size() const { return static_cast<Eigen::Index>(ops.size()); }
};

// Throws InvalidInput unless all operators are d x d and
// sum_i ops[i] ops[i]^* <= (1 + accept_eps) I.
void validate_family(const KrausFamily& fam, const Tolerance& tol = {});

Matrix apply_cp(const KrausFamily& fam, const Matrix& a);

// Row-major vectorization, vec(T)[i*d + j] = T(i, j).
Vector vec_row_major(const Matrix& t);
Matrix unvec_row_major(const Vector& v, Eigen::Index d);

// Choi matrix C = sum_i vec(T_i) vec(T_i)^*; two families present the same CP
// map exactly when their Choi matrices agree.
Matrix choi_matrix(const KrausFamily& fam);

// Kept eigenpairs of the Choi matrix, eigenvalues descending, one deterministic
// phase fix per eigenvector. Defines the canonical coordinates on the metric
// operator space of the map.
struct ChoiBasis {
    Matrix vectors;          // d^2 x r, orthonormal columns
    Eigen::VectorXd values;  // r positive eigenvalues, descending
};

ChoiBasis choi_basis(const KrausFamily& fam, const Tolerance& tol = {});

// Coordinates of an operator x in the canonical basis: coeff[a] with
// x = sum_a coeff[a] * sqrt(values[a]) * unvec(vectors.col(a)) normalized so
// that the canonical reduced operators are an orthonormal basis.
Vector metric_coords(const ChoiBasis& basis, const Matrix& x);

// Canonical minimal family presenting the same map: size equals the Choi rank,
// operators pairwise orthogonal in the Hilbert-Schmidt inner product. The zero
// map reduces to the empty family.
KrausFamily reduce_kraus(const KrausFamily& fam, const Tolerance& tol = {});

KrausFamily kraus_from_choi(Eigen::Index d, const Matrix& choi, const Tolerance& tol = {});

// Composition outer(inner(a)) with operators outer_i * inner_j in
// lexicographic (i, j) order.
KrausFamily compose_cp(const KrausFamily& outer, const KrausFamily& inner);

// Frobenius distance of the Choi matrices of theta(phi(.)) and phi(theta(.)).
double commute_residual(const KrausFamily& theta, const KrausFamily& phi);

// JSON schema {"d": d, "ops": [matrix, ...]}.
json kraus_to_json(const KrausFamily& fam);
KrausFamily kraus_from_json(const json& j);

}  // namespace cpdil
