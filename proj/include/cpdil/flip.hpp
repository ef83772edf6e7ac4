// Flip unitaries for commuting Kraus pairs: coisometries between metric
// operator spaces, the kernel-dimension commutation test, construction of the
// exchange unitary, and zero-padding of non-matching pairs.
#pragma once

#include "cpdil/kraus.hpp"

namespace cpdil {

inline constexpr const char* kFlipOrdering = "lex-row-(i,j)-col-(k,l)";

// Unitary u on C^n (x) C^m encoding T_i S_j = sum_{k,l} u[(i,j),(k,l)] S_l T_k
// with row index (i, j) and column index (k, l), both lexicographic.
struct FlipUnitary {
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    Matrix u;
};

double flip_unitarity_residual(const FlipUnitary& u);

// Max Frobenius residual of T_i S_j - sum_{k,l} u[(i,j),(k,l)] S_l T_k.
double flip_relation_residual(const KrausFamily& theta, const KrausFamily& phi,
                              const FlipUnitary& u);

// The flip as a matrix E (x) F -> F (x) E, rows indexed (l, k), columns (i, j):
// t[(l,k),(i,j)] = u[(i,j),(k,l)]. Inverse conversion reindexes back.
Matrix flip_matrix_of(const FlipUnitary& u);
FlipUnitary flip_unitary_from_matrix(Eigen::Index n, Eigen::Index m, const Matrix& t);

enum class FactorDirection {
    forward,   // m : E_Theta (x) E_Phi -> E_(ThetaPhi), products T_i S_j
    backward,  // n : E_Phi (x) E_Theta -> E_(PhiTheta), products S_l T_k
};

struct CoisometryFactor {
    Matrix matrix;  // r x (n*m), rows in the canonical composition basis
    Eigen::Index kernel_dim = 0;
    double coisometry_residual = 0.0;  // || M M^* - I ||_F
};

// Requires l2-independent families (any independent family is an orthonormal
// basis of its metric operator space, so the coordinates are canonical).
CoisometryFactor coisometry_factor(const KrausFamily& theta, const KrausFamily& phi,
                                   FactorDirection dir, const Tolerance& tol = {});

struct KernelTestReport {
    Eigen::Index dim_ker_m = 0;
    Eigen::Index dim_ker_n = 0;
    double residual_m = 0.0;
    double residual_n = 0.0;
    bool verdict = false;  // strongly commuting iff kernel dimensions agree
};

KernelTestReport strong_commute_kernel_test(const KrausFamily& theta, const KrausFamily& phi,
                                            const Tolerance& tol = {});

// Builds the exchange unitary for a commuting pair of independent families by
// extending the partial isometry n^* m. Throws NotCommuting if the pair fails
// the Choi equality test and NotStronglyCommuting on a kernel-dimension
// mismatch (unreachable for commuting pairs of independent families).
FlipUnitary build_flip_unitary(const KrausFamily& theta, const KrausFamily& phi,
                               const Tolerance& tol = {});

// Zero-padded pair of equal sizes n + m together with the block unitary s that
// exchanges the padded families. s restricts to t0 on (ker t0)^perp of the
// original corner.
struct PaddedPair {
    KrausFamily theta;  // (T_1..T_n, 0 x m)
    KrausFamily phi;    // (0 x n, S_1..S_m)
    Matrix s;           // flip matrix E_pad (x) F_pad -> F_pad (x) E_pad
};

PaddedPair pad_families(const KrausFamily& theta, const KrausFamily& phi, const Matrix& t0,
                        const Tolerance& tol = {});

// JSON schema {"n": n, "m": m, "u": matrix, "ordering": "lex-row-(i,j)-col-(k,l)"}.
json flip_to_json(const FlipUnitary& u);
FlipUnitary flip_from_json(const json& j);

}  // namespace cpdil
