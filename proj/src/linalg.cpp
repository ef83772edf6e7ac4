#include "cpdil/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpdil {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_input: return "InvalidInput";
        case ErrorCode::not_positive: return "NotPositive";
        case ErrorCode::not_partial_isometry: return "NotPartialIsometry";
        case ErrorCode::not_commuting: return "NotCommuting";
        case ErrorCode::not_strongly_commuting: return "NotStronglyCommuting";
        case ErrorCode::coisometry_check_failed: return "CoisometryCheckFailed";
        case ErrorCode::construction_failed: return "ConstructionFailed";
        case ErrorCode::too_large: return "TooLarge";
        case ErrorCode::invalid_flip: return "InvalidFlip";
        case ErrorCode::verification_failed: return "VerificationFailed";
        case ErrorCode::io_error: return "IoError";
        case ErrorCode::parse_error: return "ParseError";
        case ErrorCode::not_contractive: return "NotContractive";
    }
    return "UnknownError";
}

KernelRange kernel_and_range(const Matrix& a, const Tolerance& tol) {
    KernelRange out;
    const Eigen::Index rows = a.rows();
    const Eigen::Index cols = a.cols();
    if (rows == 0 || cols == 0) {
        out.kernel = Matrix::Identity(cols, cols);
        out.range = Matrix::Zero(rows, 0);
        out.rank = 0;
        return out;
    }
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const double thr = tol.rank_eps * smax;
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > thr && sv(rank) > 0.0) ++rank;
    out.rank = rank;
    out.range = svd.matrixU().leftCols(rank);
    out.kernel = svd.matrixV().rightCols(cols - rank);
    return out;
}

Matrix psd_sqrt(const Matrix& p, const Tolerance& tol) {
    if (p.rows() != p.cols())
        throw Error(ErrorCode::invalid_input, "psd_sqrt expects a square matrix");
    if (p.rows() == 0) return p;
    Eigen::SelfAdjointEigenSolver<Matrix> es((p + p.adjoint()) / 2.0);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::construction_failed, "eigendecomposition did not converge");
    Eigen::VectorXd lam = es.eigenvalues();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    const double eps = tol.rank_eps * scale;
    // Eigenvalues that are exactly zero in exact arithmetic come back as
    // O(eps_machine) noise; the square root would inflate that to sqrt(eps)
    // and contaminate every later rank decision, so snap noise-level
    // eigenvalues to zero before taking the root.
    const double noise = 1024.0 * std::numeric_limits<double>::epsilon() * scale;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < -eps)
            throw Error(ErrorCode::not_positive,
                        "eigenvalue " + std::to_string(lam(i)) + " below -" + std::to_string(eps));
        if (lam(i) < noise) lam(i) = 0.0;
    }
    return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

Matrix extend_partial_isometry(const Matrix& t0, const Tolerance& tol) {
    const Matrix g = t0.adjoint() * t0;
    const double scale = std::max(1.0, g.norm());
    if ((g * g - g).norm() > tol.accept_eps * scale)
        throw Error(ErrorCode::not_partial_isometry, "t0*t0 is not a projection");
    const KernelRange kr = kernel_and_range(t0, tol);
    const KernelRange cr = kernel_and_range(Matrix(t0.adjoint()), tol);
    const Eigen::Index pairs = std::min(kr.kernel.cols(), cr.kernel.cols());
    Matrix t = t0;
    for (Eigen::Index i = 0; i < pairs; ++i)
        t += cr.kernel.col(i) * kr.kernel.col(i).adjoint();
    return t;
}

Matrix orthonormal_complement(const Matrix& q, Eigen::Index dim) {
    const Eigen::Index r = q.cols();
    if (r == 0) return Matrix::Identity(dim, dim);
    if (q.rows() != dim)
        throw Error(ErrorCode::invalid_input, "orthonormal_complement row mismatch");
    if (r >= dim) return Matrix::Zero(dim, 0);
    Eigen::HouseholderQR<Matrix> qr(q);
    Matrix full = qr.householderQ() * Matrix::Identity(dim, dim);
    return full.rightCols(dim - r);
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

double operator_norm(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

bool is_hermitian(const Matrix& a, double eps) {
    return a.rows() == a.cols() && (a - a.adjoint()).norm() <= eps * std::max(1.0, a.norm());
}

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = Complex(dist(rng), dist(rng));
    return out;
}

json matrix_to_json(const Matrix& a) {
    json data = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            data.push_back({a(i, j).real(), a(i, j).imag()});
    return json{{"rows", a.rows()}, {"cols", a.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
        throw Error(ErrorCode::parse_error, "matrix JSON needs rows, cols, data");
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || !data.is_array() ||
        data.size() != static_cast<size_t>(rows * cols))
        throw Error(ErrorCode::parse_error, "matrix JSON data length mismatch");
    Matrix a(rows, cols);
    size_t idx = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j2 = 0; j2 < cols; ++j2, ++idx) {
            const auto& e = data.at(idx);
            if (!e.is_array() || e.size() != 2 || !e.at(0).is_number() || !e.at(1).is_number())
                throw Error(ErrorCode::parse_error, "matrix entry must be [re, im]");
            a(i, j2) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
        }
    return a;
}

}  // namespace cpdil
