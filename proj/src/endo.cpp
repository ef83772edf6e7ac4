#include "cpdil/endo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "cpdil/error.hpp"
#include "cpdil/flip.hpp"
#include "cpdil/gram.hpp"

namespace cpdil {

namespace {

Matrix sandwich_sum(const std::vector<SparseMatrix>& ops, const Matrix& b) {
    if (ops.empty()) throw Error(ErrorCode::invalid_input, "empty operator tuple");
    Matrix out = Matrix::Zero(b.rows(), b.cols());
    for (const auto& op : ops) {
        const Matrix t = op * b;
        out.noalias() += t * op.adjoint();
    }
    return out;
}

// Dense copy of the top-left rows x cols corner of a sparse matrix.
Matrix corner_block(const SparseMatrix& a, Eigen::Index rows, Eigen::Index cols) {
    Matrix out = Matrix::Zero(rows, cols);
    for (Eigen::Index c = 0; c < std::min(cols, a.outerSize()); ++c)
        for (SparseMatrix::InnerIterator it(a, c); it; ++it)
            if (it.row() < rows) out(it.row(), c) = it.value();
    return out;
}

// Columns [0, cols) of a sparse matrix as a sparse block.
SparseMatrix left_cols(const SparseMatrix& a, Eigen::Index cols) {
    std::vector<Triplet> trips;
    for (Eigen::Index c = 0; c < cols; ++c)
        for (SparseMatrix::InnerIterator it(a, c); it; ++it)
            trips.emplace_back(it.row(), c, it.value());
    SparseMatrix out(a.rows(), cols);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

Matrix random_window_operator(Eigen::Index dim, std::mt19937_64& rng) {
    Matrix b = random_gaussian(dim, dim, rng);
    const double nrm = b.norm();
    if (nrm > 0.0) b /= nrm;
    return b;
}

double corner_recovery_residual(const KrausFamily& target,
                                const std::vector<Matrix>& corner_ops, Eigen::Index dh) {
    double worst = 0.0;
    for (Eigen::Index p = 0; p < dh; ++p)
        for (Eigen::Index q = 0; q < dh; ++q) {
            Matrix unit = Matrix::Zero(dh, dh);
            unit(p, q) = 1.0;
            Matrix got = Matrix::Zero(dh, dh);
            for (const auto& op : corner_ops) got.noalias() += op * unit * op.adjoint();
            worst = std::max(worst, (apply_cp(target, unit) - got).norm());
        }
    return worst;
}

double coinvariance_residual(const std::vector<SparseMatrix>& ops,
                             const std::vector<Matrix>& corner_ops, const Matrix& emb) {
    Matrix d = Matrix::Zero(emb.rows(), emb.cols());
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const Matrix lifted = ops[i] * emb;
        d.noalias() += lifted * corner_ops[i].adjoint();
        d.noalias() -= ops[i] * (ops[i].adjoint() * emb);
    }
    return d.norm();
}

}  // namespace

Matrix EndoPair::alpha(const Matrix& b) const { return sandwich_sum(result.V, b); }

Matrix EndoPair::beta(const Matrix& b) const { return sandwich_sum(result.U, b); }

EndoPair lift_endomorphisms(DilationResult result) {
    EndoPair pair;
    pair.valid_depth = result.valid_depth;
    pair.result = std::move(result);
    return pair;
}

Report verify_endomorphic_dilation(const EndoPair& pair, const KrausFamily& theta,
                                   const KrausFamily& phi, const EndoOptions& opts,
                                   const Tolerance& tol) {
    const DilationResult& dil = pair.result;
    const Eigen::Index L = dil.space.levels;
    const Eigen::Index dh = dil.space.d_h;
    if (theta.d != dh || phi.d != dh)
        throw Error(ErrorCode::invalid_input, "CP maps act on a different matrix size");
    if (opts.depth < 0 || opts.depth > L - 2)
        throw Error(ErrorCode::invalid_input,
                    "window depth must lie in [0, L - 2] for endomorphism checks");
    if (opts.samples < 1 || opts.commutation_samples < 1)
        throw Error(ErrorCode::invalid_input, "sample counts must be positive");

    const Eigen::Index n = static_cast<Eigen::Index>(dil.V.size());
    const Eigen::Index m = static_cast<Eigen::Index>(dil.U.size());
    const Eigen::Index dwin = dil.space.dim_upto(opts.depth);
    const Matrix emb = embed_h(dil.space);
    const double corner_eps = std::min(tol.accept_eps, 1e-10);

    std::vector<Matrix> tcorner(n), scorner(m);
    for (Eigen::Index i = 0; i < n; ++i) tcorner[i] = corner_block(dil.V[i], dh, dh);
    for (Eigen::Index j = 0; j < m; ++j) scorner[j] = corner_block(dil.U[j], dh, dh);

    Report report;
    report.add("corner-recovery-alpha", corner_recovery_residual(theta, tcorner, dh),
               "matrix units on H", corner_eps);
    report.add("corner-recovery-beta", corner_recovery_residual(phi, scorner, dh),
               "matrix units on H", corner_eps);

    report.add("coinvariance-alpha", coinvariance_residual(dil.V, tcorner, emb), "H",
               tol.accept_eps);
    report.add("coinvariance-beta", coinvariance_residual(dil.U, scorner, emb), "H",
               tol.accept_eps);

    std::mt19937_64 rng(opts.seed);
    const std::string window = "grades <= " + std::to_string(opts.depth);

    // alpha(b1 b2) - alpha(b1) alpha(b2) = sum_ij V_i b1 (delta_ij - V_i* V_j) b2 V_j*
    // for operators supported on the window; the stacked [V_i|window] is an
    // isometry there, so the Frobenius norm of the middle block matrix is the
    // residual up to machine-precision relative error.
    const auto multiplicativity = [&](const std::vector<SparseMatrix>& ops) {
        const Eigen::Index count = static_cast<Eigen::Index>(ops.size());
        std::vector<Matrix> gap(count * count);
        for (Eigen::Index i = 0; i < count; ++i)
            for (Eigen::Index j = 0; j < count; ++j) {
                const SparseMatrix g = (SparseMatrix(ops[i].adjoint()) * ops[j]).pruned();
                Matrix e = -corner_block(g, dwin, dwin);
                if (i == j) e += Matrix::Identity(dwin, dwin);
                gap[i * count + j] = std::move(e);
            }
        double worst = 0.0;
        for (Eigen::Index s = 0; s < opts.samples; ++s) {
            const Matrix b1 = random_window_operator(dwin, rng);
            const Matrix b2 = random_window_operator(dwin, rng);
            double sq = 0.0;
            for (const auto& e : gap) {
                const Matrix t = b1 * e;
                sq += (t * b2).squaredNorm();
            }
            worst = std::max(worst, std::sqrt(sq));
        }
        return worst;
    };
    report.add("multiplicativity-alpha", multiplicativity(dil.V), window, tol.accept_eps);
    report.add("multiplicativity-beta", multiplicativity(dil.U), window, tol.accept_eps);

    // alpha(beta(b)) - beta(alpha(b)) compressed back to the window.
    std::vector<Matrix> aw(n * m), bw(n * m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            const SparseMatrix uwin = left_cols(dil.U[j], dwin);
            const SparseMatrix vwin = left_cols(dil.V[i], dwin);
            aw[i * m + j] = corner_block(SparseMatrix(dil.V[i] * uwin), dwin, dwin);
            bw[i * m + j] = corner_block(SparseMatrix(dil.U[j] * vwin), dwin, dwin);
        }
    double comm = 0.0;
    for (Eigen::Index s = 0; s < opts.commutation_samples; ++s) {
        const Matrix b = random_window_operator(dwin, rng);
        Matrix acc = Matrix::Zero(dwin, dwin);
        for (Eigen::Index k = 0; k < n * m; ++k) {
            acc.noalias() += aw[k] * b * aw[k].adjoint();
            acc.noalias() -= bw[k] * b * bw[k].adjoint();
        }
        comm = std::max(comm, acc.norm());
    }
    report.add("endo-commutation", comm, window, tol.accept_eps);

    return report;
}

namespace {

RoundtripReport roundtrip_impl(const CovariantRep& rep, const FlipUnitary* reference,
                               const Tolerance& tol) {
    RoundtripReport out;
    out.n = static_cast<Eigen::Index>(rep.T.size());
    out.m = static_cast<Eigen::Index>(rep.S.size());
    if (rep.h < 1 || out.n < 1 || out.m < 1)
        throw Error(ErrorCode::invalid_input, "rep must carry nonempty operator tuples");

    auto induced = induced_cp_pair(rep);
    KrausFamily theta = std::move(induced.first);
    KrausFamily phi = std::move(induced.second);

    const auto family_rank = [&](const KrausFamily& fam) {
        Matrix stacked(fam.d * fam.d, static_cast<Eigen::Index>(fam.ops.size()));
        for (std::size_t i = 0; i < fam.ops.size(); ++i)
            stacked.col(static_cast<Eigen::Index>(i)) = vec_row_major(fam.ops[i]);
        return kernel_and_range(stacked, tol).rank;
    };
    const Eigen::Index rank_t = family_rank(theta);
    const Eigen::Index rank_s = family_rank(phi);
    out.index_drop_t = rank_t < out.n;
    out.index_drop_s = rank_s < out.m;
    const KrausFamily theta_use = out.index_drop_t ? reduce_kraus(theta, tol) : theta;
    const KrausFamily phi_use = out.index_drop_s ? reduce_kraus(phi, tol) : phi;
    out.reduced_n = static_cast<Eigen::Index>(theta_use.ops.size());
    out.reduced_m = static_cast<Eigen::Index>(phi_use.ops.size());

    out.dim_e_theta = static_cast<Eigen::Index>(intertwiner_space(theta, tol).basis.size());
    out.dim_e_phi = static_cast<Eigen::Index>(intertwiner_space(phi, tol).basis.size());

    const FlipUnitary rebuilt = build_flip_unitary(theta_use, phi_use, tol);
    out.relation_residual = flip_relation_residual(theta_use, phi_use, rebuilt);

    if (reference != nullptr && !out.index_drop_t && !out.index_drop_s &&
        reference->n == rebuilt.n && reference->m == rebuilt.m)
        out.flip_distance = (reference->u - rebuilt.u).norm();

    out.pass = out.dim_e_theta == out.reduced_n && out.dim_e_phi == out.reduced_m &&
               out.relation_residual <= tol.accept_eps;
    return out;
}

}  // namespace

RoundtripReport roundtrip_metric_spaces(const CovariantRep& rep, const Tolerance& tol) {
    return roundtrip_impl(rep, nullptr, tol);
}

RoundtripReport roundtrip_metric_spaces(const ScalarProductSystem& sys,
                                        const CovariantRep& rep, const Tolerance& tol) {
    const FlipUnitary& u = sys.unitary();
    return roundtrip_impl(rep, &u, tol);
}

json roundtrip_to_json(const RoundtripReport& report) {
    return json{{"n", report.n},
                {"m", report.m},
                {"reduced_n", report.reduced_n},
                {"reduced_m", report.reduced_m},
                {"index_drop_t", report.index_drop_t},
                {"index_drop_s", report.index_drop_s},
                {"dim_E_theta", report.dim_e_theta},
                {"dim_E_phi", report.dim_e_phi},
                {"relation_residual", report.relation_residual},
                {"flip_distance", report.flip_distance},
                {"verdict", report.pass ? "pass" : "fail"}};
}

}  // namespace cpdil
