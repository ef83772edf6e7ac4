#include "cpdil/flip.hpp"

#include <algorithm>
#include <cmath>

namespace cpdil {

double flip_unitarity_residual(const FlipUnitary& u) {
    const Eigen::Index nm = u.n * u.m;
    if (u.u.rows() != nm || u.u.cols() != nm)
        throw Error(ErrorCode::invalid_flip, "flip matrix must be nm x nm");
    return (u.u.adjoint() * u.u - Matrix::Identity(nm, nm)).norm();
}

double flip_relation_residual(const KrausFamily& theta, const KrausFamily& phi,
                              const FlipUnitary& u) {
    const Eigen::Index n = theta.size();
    const Eigen::Index m = phi.size();
    if (u.n != n || u.m != m)
        throw Error(ErrorCode::invalid_input, "flip size does not match the families");
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            Matrix rhs = Matrix::Zero(theta.d, theta.d);
            for (Eigen::Index k = 0; k < n; ++k)
                for (Eigen::Index l = 0; l < m; ++l)
                    rhs += u.u(i * m + j, k * m + l) * phi.ops[l] * theta.ops[k];
            worst = std::max(worst, (theta.ops[i] * phi.ops[j] - rhs).norm());
        }
    return worst;
}

Matrix flip_matrix_of(const FlipUnitary& u) {
    const Eigen::Index n = u.n;
    const Eigen::Index m = u.m;
    Matrix t(m * n, n * m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index k = 0; k < n; ++k)
                for (Eigen::Index l = 0; l < m; ++l)
                    t(l * n + k, i * m + j) = u.u(i * m + j, k * m + l);
    return t;
}

FlipUnitary flip_unitary_from_matrix(Eigen::Index n, Eigen::Index m, const Matrix& t) {
    if (t.rows() != m * n || t.cols() != n * m)
        throw Error(ErrorCode::invalid_input, "flip matrix shape mismatch");
    FlipUnitary u;
    u.n = n;
    u.m = m;
    u.u.resize(n * m, n * m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index k = 0; k < n; ++k)
                for (Eigen::Index l = 0; l < m; ++l)
                    u.u(i * m + j, k * m + l) = t(l * n + k, i * m + j);
    return u;
}

static void require_independent(const KrausFamily& fam, const Tolerance& tol,
                                const char* which) {
    if (choi_basis(fam, tol).values.size() != fam.size())
        throw Error(ErrorCode::invalid_input,
                    std::string(which) + " family is not l2-independent; reduce it first");
}

CoisometryFactor coisometry_factor(const KrausFamily& theta, const KrausFamily& phi,
                                   FactorDirection dir, const Tolerance& tol) {
    require_independent(theta, tol, "theta");
    require_independent(phi, tol, "phi");
    const KrausFamily comp = dir == FactorDirection::forward ? compose_cp(theta, phi)
                                                             : compose_cp(phi, theta);
    const ChoiBasis basis = choi_basis(comp, tol);
    const Eigen::Index r = basis.values.size();
    const Eigen::Index cols = comp.size();
    CoisometryFactor out;
    out.matrix.resize(r, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        out.matrix.col(c) = metric_coords(basis, comp.ops[c]);
    out.kernel_dim = cols - r;
    out.coisometry_residual =
        (out.matrix * out.matrix.adjoint() - Matrix::Identity(r, r)).norm();
    if (out.coisometry_residual > tol.accept_eps * std::sqrt(static_cast<double>(r) + 1.0))
        throw Error(ErrorCode::coisometry_check_failed,
                    "product coordinates do not form a coisometry");
    return out;
}

static void require_commuting(const KrausFamily& theta, const KrausFamily& phi,
                              const Tolerance& tol) {
    const double res = commute_residual(theta, phi);
    const double scale = std::max(1.0, choi_matrix(compose_cp(theta, phi)).norm());
    if (res > tol.accept_eps * scale)
        throw Error(ErrorCode::not_commuting,
                    "Choi matrices of the two compositions differ by " + std::to_string(res));
}

KernelTestReport strong_commute_kernel_test(const KrausFamily& theta, const KrausFamily& phi,
                                            const Tolerance& tol) {
    require_commuting(theta, phi, tol);
    const CoisometryFactor m = coisometry_factor(theta, phi, FactorDirection::forward, tol);
    const CoisometryFactor n = coisometry_factor(theta, phi, FactorDirection::backward, tol);
    KernelTestReport out;
    out.dim_ker_m = m.kernel_dim;
    out.dim_ker_n = n.kernel_dim;
    out.residual_m = m.coisometry_residual;
    out.residual_n = n.coisometry_residual;
    out.verdict = m.kernel_dim == n.kernel_dim;
    return out;
}

FlipUnitary build_flip_unitary(const KrausFamily& theta, const KrausFamily& phi,
                               const Tolerance& tol) {
    require_independent(theta, tol, "theta");
    require_independent(phi, tol, "phi");
    require_commuting(theta, phi, tol);
    const Eigen::Index n = theta.size();
    const Eigen::Index m = phi.size();
    // One canonical basis for both composition orders; the Choi matrices agree
    // for a commuting pair, so the backward products live in the same space.
    const ChoiBasis basis = choi_basis(compose_cp(theta, phi), tol);
    const Eigen::Index r = basis.values.size();
    Matrix mm(r, n * m);
    Matrix nn(r, m * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            mm.col(i * m + j) = metric_coords(basis, theta.ops[i] * phi.ops[j]);
    for (Eigen::Index l = 0; l < m; ++l)
        for (Eigen::Index k = 0; k < n; ++k)
            nn.col(l * n + k) = metric_coords(basis, phi.ops[l] * theta.ops[k]);
    const double ok = std::sqrt(static_cast<double>(r) + 1.0) * tol.accept_eps;
    if ((mm * mm.adjoint() - Matrix::Identity(r, r)).norm() > ok ||
        (nn * nn.adjoint() - Matrix::Identity(r, r)).norm() > ok)
        throw Error(ErrorCode::coisometry_check_failed,
                    "product coordinates do not form coisometries");
    const Matrix t0 = nn.adjoint() * mm;
    const Matrix t = extend_partial_isometry(t0, tol);
    const Eigen::Index nm = n * m;
    if ((t.adjoint() * t - Matrix::Identity(nm, nm)).norm() > ok)
        throw Error(ErrorCode::not_strongly_commuting,
                    "kernel dimensions mismatch blocks the unitary extension");
    FlipUnitary u = flip_unitary_from_matrix(n, m, t);
    if (flip_relation_residual(theta, phi, u) > tol.accept_eps)
        throw Error(ErrorCode::construction_failed,
                    "constructed flip fails the exchange relation T_i S_j = sum u S_l T_k");
    return u;
}

PaddedPair pad_families(const KrausFamily& theta, const KrausFamily& phi, const Matrix& t0,
                        const Tolerance& tol) {
    const Eigen::Index n = theta.size();
    const Eigen::Index m = phi.size();
    const Eigen::Index d = theta.d;
    if (phi.d != d) throw Error(ErrorCode::invalid_input, "pad_families dimension mismatch");
    if (t0.rows() != m * n || t0.cols() != n * m)
        throw Error(ErrorCode::invalid_input, "t0 must map E (x) F to F (x) E");
    const Matrix t = extend_partial_isometry(t0, tol);
    const Eigen::Index p = n + m;
    PaddedPair out;
    out.theta.d = d;
    out.phi.d = d;
    for (Eigen::Index i = 0; i < n; ++i) out.theta.ops.push_back(theta.ops[i]);
    for (Eigen::Index j = 0; j < m; ++j) out.theta.ops.push_back(Matrix::Zero(d, d));
    for (Eigen::Index i = 0; i < n; ++i) out.phi.ops.push_back(Matrix::Zero(d, d));
    for (Eigen::Index j = 0; j < m; ++j) out.phi.ops.push_back(phi.ops[j]);

    // Padded index spaces: E = E0 + F1 and F = E1 + F0, original summands
    // first resp. last. Block rows/columns of s in the local coordinates all
    // reduce to t, I - t^* t, I - t t^*, t^*, and identity relabelings.
    const Matrix itt = Matrix::Identity(n * m, n * m) - t.adjoint() * t;
    const Matrix tti = Matrix::Identity(m * n, m * n) - t * t.adjoint();
    Matrix s = Matrix::Zero(p * p, p * p);
    auto col_ef = [&](Eigen::Index alpha, Eigen::Index beta) { return alpha * p + beta; };
    auto row_fe = [&](Eigen::Index betap, Eigen::Index alphap) { return betap * p + alphap; };
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            const Eigen::Index col = col_ef(i, n + j);  // E0 (x) F0
            for (Eigen::Index l = 0; l < m; ++l)
                for (Eigen::Index k = 0; k < n; ++k)
                    s(row_fe(n + l, k), col) = t(l * n + k, i * m + j);  // F0 (x) E0
            for (Eigen::Index ii = 0; ii < n; ++ii)
                for (Eigen::Index jj = 0; jj < m; ++jj)
                    s(row_fe(ii, n + jj), col) = itt(ii * m + jj, i * m + j);  // E1 (x) F1
        }
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
            const Eigen::Index col = col_ef(n + j, k);  // F1 (x) E1
            for (Eigen::Index l = 0; l < m; ++l)
                for (Eigen::Index kk = 0; kk < n; ++kk)
                    s(row_fe(n + l, kk), col) = tti(l * n + kk, j * n + k);  // F0 (x) E0
            for (Eigen::Index ii = 0; ii < n; ++ii)
                for (Eigen::Index jj = 0; jj < m; ++jj)
                    s(row_fe(ii, n + jj), col) = t.adjoint()(ii * m + jj, j * n + k);
        }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k)
            s(row_fe(i, k), col_ef(i, k)) = 1.0;  // E0 (x) E1 -> E1 (x) E0
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index l = 0; l < m; ++l)
            s(row_fe(n + j, n + l), col_ef(n + j, n + l)) = 1.0;  // F1 (x) F0 -> F0 (x) F1
    if ((s.adjoint() * s - Matrix::Identity(p * p, p * p)).norm() >
        tol.accept_eps * static_cast<double>(p))
        throw Error(ErrorCode::construction_failed, "padded exchange block matrix not unitary");
    out.s = s;
    return out;
}

json flip_to_json(const FlipUnitary& u) {
    return json{{"n", u.n}, {"m", u.m}, {"u", matrix_to_json(u.u)}, {"ordering", kFlipOrdering}};
}

FlipUnitary flip_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("m") || !j.contains("u"))
        throw Error(ErrorCode::parse_error, "flip JSON needs n, m, u");
    if (j.contains("ordering") && j.at("ordering").get<std::string>() != kFlipOrdering)
        throw Error(ErrorCode::parse_error, "unsupported flip ordering");
    FlipUnitary u;
    u.n = j.at("n").get<Eigen::Index>();
    u.m = j.at("m").get<Eigen::Index>();
    u.u = matrix_from_json(j.at("u"));
    if (flip_unitarity_residual(u) > 1e-8)
        throw Error(ErrorCode::invalid_flip, "flip matrix is not unitary");
    return u;
}

}  // namespace cpdil
