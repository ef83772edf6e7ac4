// Isometric dilation of a covariant representation on the truncated graded
// space: primitive shift isometries, the inductive level-corrector chain, the
// assembled commuting isometric tuples, verification, and the minimal
// invariant restriction.
#pragma once

#include <utility>
#include <vector>

#include "cpdil/fock.hpp"
#include "cpdil/report.hpp"

namespace cpdil {

// Primitive shifts as sparse maps into the full truncated space:
//   v2 : E (x) K[L-1] -> K,   u2 : F (x) K[L-1] -> K,
// with column index (letter * dim K[L-1] + basis index). Both are isometries;
// v2 absorbs an e-letter through the tuple row on pure-F grades and creates a
// defect letter otherwise, u2 mirrors this on the F side.
struct PrimitiveIsometries {
    SparseMatrix v2;
    SparseMatrix u2;
};

PrimitiveIsometries build_primitive_isometries(const ScalarProductSystem& sys,
                                               const CovariantRep& rep,
                                               const GradedFockSpace& space,
                                               const Tolerance& tol = {});

// Level-diagonal unitary chain W = (+) W(k). blocks[k] acts on level k;
// blocks[0] is the identity and the top block is stored as an empty matrix
// standing for the identity. residual_level[k] records how well
// the corrected double shift matches the exchanged double shift on inputs one
// level down (the construction-time self-check).
struct CorrectorChain {
    std::vector<Matrix> blocks;
    std::vector<double> residual_level;
};

CorrectorChain build_corrector(const ScalarProductSystem& sys, const GradedFockSpace& space,
                               const PrimitiveIsometries& prim, const Tolerance& tol = {});

// Dilated commuting isometric tuples on the truncated space. V[i] and U[j] are
// total x total with columns zeroed beyond K[L-1]; identities hold on windows
// bounded by valid_depth = L - 1.
struct DilationResult {
    ScalarProductSystem sys;
    CovariantRep rep;
    GradedFockSpace space;
    PrimitiveIsometries prim;
    CorrectorChain corrector;
    std::vector<SparseMatrix> V;
    std::vector<SparseMatrix> U;
    Eigen::Index valid_depth = 0;
};

// V_i = W * v2(e_i (x) .), U_j = u2(f_j (x) W^{-1} .) as total x total sparse
// operators. Exposed so tests can reassemble with a tampered corrector chain.
std::pair<std::vector<SparseMatrix>, std::vector<SparseMatrix>> assemble_operators(
    const GradedFockSpace& space, const PrimitiveIsometries& prim,
    const CorrectorChain& corrector);

// Full pipeline: graded space, primitive shifts, corrector chain, corrected
// operators, plus a shallow self-verification of the dilation contracts.
DilationResult assemble_dilation(const ScalarProductSystem& sys, const CovariantRep& rep,
                                 Eigen::Index levels, Eigen::Index mu = 0,
                                 const Tolerance& tol = {},
                                 Eigen::Index dim_cap = kDefaultDimCap);

// Isometric embedding of H onto the level-0 block (dense total x d_h selector).
Matrix embed_h(const GradedFockSpace& space);

using Letter = std::pair<Side, Eigen::Index>;

// Compression P_H Op(w_1) ... Op(w_k) |H with Op the corrected shift picked by
// each letter; equals the same word in the representation letters.
Matrix compress_word(const DilationResult& result, const std::vector<Letter>& word);
Matrix expected_word(const CovariantRep& rep, const std::vector<Letter>& word);

// Residual report over: corner words up to the given depth, isometry and range
// orthogonality on K[L-1], the exchange commutation on K[L-2], and invariance
// of the complement of H. Requires 0 <= depth <= valid_depth - 1.
Report verify_dilation(const DilationResult& result, Eigen::Index depth,
                       const Tolerance& tol = {});

// Smallest subspace containing H and invariant under all shifts up to the
// valid word window, with the restricted operators expressed in an
// orthonormal basis whose first d_h columns are H itself.
struct MinimalRestriction {
    Matrix basis;
    std::vector<Matrix> V;
    std::vector<Matrix> U;
    double invariance_residual = 0.0;
    double corner_residual = 0.0;
};

MinimalRestriction minimal_restriction(const DilationResult& result,
                                       const Tolerance& tol = {});

// Sparse JSON schema {"rows", "cols", "triplets": [[row, col, re, im], ...]}
// in column-major order.
json sparse_to_json(const SparseMatrix& a);
SparseMatrix sparse_from_json(const json& j);

// Dilation JSON: system, representation, space metadata, per-level corrector
// residuals, and (optionally) the corrector blocks and sparse operators.
// Import re-verifies shapes and rebuilds anything omitted.
json dilation_to_json(const DilationResult& result, bool include_operators = true);
DilationResult dilation_from_json(const json& j, const Tolerance& tol = {});

}  // namespace cpdil
