#include "cpdil/kraus.hpp"

#include <algorithm>
#include <cmath>

namespace cpdil {

void validate_family(const KrausFamily& fam, const Tolerance& tol) {
    if (fam.d <= 0) throw Error(ErrorCode::invalid_input, "Kraus family needs d >= 1");
    Matrix sum = Matrix::Zero(fam.d, fam.d);
    for (const auto& op : fam.ops) {
        if (op.rows() != fam.d || op.cols() != fam.d)
            throw Error(ErrorCode::invalid_input, "Kraus operator is not d x d");
        sum += op * op.adjoint();
    }
    if (fam.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(sum);
        if (es.eigenvalues().maxCoeff() > 1.0 + tol.accept_eps)
            throw Error(ErrorCode::invalid_input,
                        "Kraus family is not contractive: sum T_i T_i^* exceeds I");
    }
}

Matrix apply_cp(const KrausFamily& fam, const Matrix& a) {
    if (a.rows() != fam.d || a.cols() != fam.d)
        throw Error(ErrorCode::invalid_input, "apply_cp argument is not d x d");
    Matrix out = Matrix::Zero(fam.d, fam.d);
    for (const auto& op : fam.ops) out += op * a * op.adjoint();
    return out;
}

Vector vec_row_major(const Matrix& t) {
    Vector v(t.rows() * t.cols());
    for (Eigen::Index i = 0; i < t.rows(); ++i)
        for (Eigen::Index j = 0; j < t.cols(); ++j) v(i * t.cols() + j) = t(i, j);
    return v;
}

Matrix unvec_row_major(const Vector& v, Eigen::Index d) {
    if (v.size() != d * d) throw Error(ErrorCode::invalid_input, "unvec size mismatch");
    Matrix t(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) t(i, j) = v(i * d + j);
    return t;
}

Matrix choi_matrix(const KrausFamily& fam) {
    Matrix c = Matrix::Zero(fam.d * fam.d, fam.d * fam.d);
    for (const auto& op : fam.ops) {
        const Vector v = vec_row_major(op);
        c += v * v.adjoint();
    }
    return c;
}

// Rotates v so that its first entry of near-maximal modulus is real positive.
static void fix_phase(Eigen::Ref<Vector> v) {
    const double maxabs = v.cwiseAbs().maxCoeff();
    if (maxabs <= 0.0) return;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= 0.5 * maxabs) {
            v *= std::conj(v(i)) / std::abs(v(i));
            return;
        }
    }
}

ChoiBasis choi_basis(const KrausFamily& fam, const Tolerance& tol) {
    const Matrix c = choi_matrix(fam);
    Eigen::SelfAdjointEigenSolver<Matrix> es(c);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::construction_failed, "Choi eigendecomposition failed");
    const Eigen::VectorXd lam = es.eigenvalues();
    const double lmax = lam.size() > 0 ? lam.cwiseAbs().maxCoeff() : 0.0;
    const double thr = tol.rank_eps * lmax;
    ChoiBasis out;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = lam.size() - 1; i >= 0; --i)
        if (lam(i) > thr && lam(i) > 0.0) keep.push_back(i);
    out.vectors.resize(c.rows(), static_cast<Eigen::Index>(keep.size()));
    out.values.resize(static_cast<Eigen::Index>(keep.size()));
    for (size_t a = 0; a < keep.size(); ++a) {
        Vector v = es.eigenvectors().col(keep[a]);
        fix_phase(v);
        out.vectors.col(static_cast<Eigen::Index>(a)) = v;
        out.values(static_cast<Eigen::Index>(a)) = lam(keep[a]);
    }
    return out;
}

Vector metric_coords(const ChoiBasis& basis, const Matrix& x) {
    Vector raw = basis.vectors.adjoint() * vec_row_major(x);
    for (Eigen::Index a = 0; a < raw.size(); ++a) raw(a) /= std::sqrt(basis.values(a));
    return raw;
}

KrausFamily reduce_kraus(const KrausFamily& fam, const Tolerance& tol) {
    const ChoiBasis basis = choi_basis(fam, tol);
    KrausFamily out;
    out.d = fam.d;
    for (Eigen::Index a = 0; a < basis.values.size(); ++a)
        out.ops.push_back(std::sqrt(basis.values(a)) *
                          unvec_row_major(basis.vectors.col(a), fam.d));
    return out;
}

KrausFamily kraus_from_choi(Eigen::Index d, const Matrix& choi, const Tolerance& tol) {
    if (choi.rows() != d * d || choi.cols() != d * d)
        throw Error(ErrorCode::invalid_input, "Choi matrix must be d^2 x d^2");
    if (!is_hermitian(choi))
        throw Error(ErrorCode::not_positive, "Choi matrix is not Hermitian");
    KrausFamily probe{d, {}};
    // Reuse the eigenpair path by treating the given matrix as the Choi matrix
    // of a synthetic family: decompose directly.
    Eigen::SelfAdjointEigenSolver<Matrix> es(choi);
    const Eigen::VectorXd lam = es.eigenvalues();
    const double lmax = lam.size() > 0 ? lam.cwiseAbs().maxCoeff() : 0.0;
    const double thr = tol.rank_eps * std::max(1.0, lmax);
    KrausFamily out;
    out.d = d;
    for (Eigen::Index i = lam.size() - 1; i >= 0; --i) {
        if (lam(i) < -thr)
            throw Error(ErrorCode::not_positive, "Choi matrix has a negative eigenvalue");
        if (lam(i) > tol.rank_eps * lmax && lam(i) > 0.0) {
            Vector v = es.eigenvectors().col(i);
            fix_phase(v);
            out.ops.push_back(std::sqrt(lam(i)) * unvec_row_major(v, d));
        }
    }
    return out;
}

KrausFamily compose_cp(const KrausFamily& outer, const KrausFamily& inner) {
    if (outer.d != inner.d)
        throw Error(ErrorCode::invalid_input, "compose_cp dimension mismatch");
    KrausFamily out;
    out.d = outer.d;
    for (const auto& t : outer.ops)
        for (const auto& s : inner.ops) out.ops.push_back(t * s);
    return out;
}

double commute_residual(const KrausFamily& theta, const KrausFamily& phi) {
    return (choi_matrix(compose_cp(theta, phi)) - choi_matrix(compose_cp(phi, theta))).norm();
}

json kraus_to_json(const KrausFamily& fam) {
    json ops = json::array();
    for (const auto& op : fam.ops) ops.push_back(matrix_to_json(op));
    return json{{"d", fam.d}, {"ops", std::move(ops)}};
}

KrausFamily kraus_from_json(const json& j) {
    if (!j.is_object() || !j.contains("d") || !j.contains("ops"))
        throw Error(ErrorCode::parse_error, "Kraus JSON needs d and ops");
    KrausFamily fam;
    fam.d = j.at("d").get<Eigen::Index>();
    const auto& ops = j.at("ops");
    if (!ops.is_array() || ops.empty())
        throw Error(ErrorCode::parse_error, "Kraus JSON ops must be a nonempty array");
    for (const auto& op : ops) fam.ops.push_back(matrix_from_json(op));
    validate_family(fam);
    return fam;
}

}  // namespace cpdil
