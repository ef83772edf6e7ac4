// Finite-dimensional realizations of the tensor spaces attached to a pair of
// CP maps: Gram matrices over matrix-unit generators, the direct
// strong-commutation test, and the intertwiner realization of a single map.
#pragma once

#include "cpdil/kraus.hpp"

namespace cpdil {

// Which map couples the middle tensor slot and which couples the vector slot.
// phi_theta: generators a (x) b (x) h with inner product
//   <a1 (x) b1 (x) h1, a2 (x) b2 (x) h2> = <h1, theta(b1^* phi(a1^* a2) b2) h2>.
// theta_phi swaps the two roles.
enum class TensorOrder { phi_theta, theta_phi };

inline constexpr Eigen::Index kMaxGramDim = 3;         // d^5 generators
inline constexpr Eigen::Index kMaxIntertwinerDim = 5;  // d^3 generators

struct GramSpace {
    Eigen::Index d = 0;
    TensorOrder order = TensorOrder::phi_theta;
    Matrix gram;  // d^5 x d^5 over generators (p,q,r,s,t) lex
    Eigen::Index rank = 0;
};

// Generator (p,q,r,s,t) stands for E_pq (x) E_rs (x) e_t.
GramSpace gram_tensor_space(const KrausFamily& theta, const KrausFamily& phi,
                            TensorOrder order, const Tolerance& tol = {});

struct StrongCommuteReport {
    double isometry_residual = 0.0;     // Gram mismatch of the special vectors a (x) I (x) h
    Eigen::Index complement_phi_theta = 0;  // dim of the complement of their module span
    Eigen::Index complement_theta_phi = 0;
    bool verdict = false;
};

// Direct oracle: the special-vector correspondence extends to an intertwining
// unitary over B(C^d) exactly when it is isometric and the module complements
// have equal dimension.
StrongCommuteReport strong_commute_direct(const KrausFamily& theta, const KrausFamily& phi,
                                          const Tolerance& tol = {});

struct IntertwinerSpace {
    Eigen::Index space_dim = 0;       // dim of the realized tensor space
    std::vector<Matrix> basis;        // X_beta : C^d -> realized space, X^* X = I
    std::vector<Matrix> rep;          // T_beta = W^* X_beta, a Kraus family for the map
};

// Realizes the space generated by a (x) h with <a1 (x) h1, a2 (x) h2> =
// <h1, theta(a1^* a2) h2>, solves X a = (a (x) I) X for all a, and recovers a
// minimal Kraus family from the basis. dim(basis) equals the reduced size.
IntertwinerSpace intertwiner_space(const KrausFamily& theta, const Tolerance& tol = {});

}  // namespace cpdil
