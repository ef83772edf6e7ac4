#include "cpdil/product_system.hpp"

#include <cmath>

namespace cpdil {

static Eigen::Index ipow(Eigen::Index base, Eigen::Index exp) {
    Eigen::Index out = 1;
    for (Eigen::Index i = 0; i < exp; ++i) out *= base;
    return out;
}

ScalarProductSystem make_system(const FlipUnitary& u, const Tolerance& tol) {
    if (u.n <= 0 || u.m <= 0)
        throw Error(ErrorCode::invalid_input, "product system needs n, m >= 1");
    if (flip_unitarity_residual(u) > tol.accept_eps)
        throw Error(ErrorCode::invalid_flip, "exchange matrix is not unitary");
    ScalarProductSystem sys;
    sys.u_ = u;
    sys.t11_ = flip_matrix_of(u);
    sys.cache_ = std::make_shared<ScalarProductSystem::Cache>();
    return sys;
}

Matrix ScalarProductSystem::flip_mn(Eigen::Index m_pow, Eigen::Index n_pow) const {
    if (m_pow < 0 || n_pow < 0)
        throw Error(ErrorCode::invalid_input, "flip powers must be nonnegative");
    const Eigen::Index dim = ipow(u_.n, m_pow) * ipow(u_.m, n_pow);
    if (m_pow == 0 || n_pow == 0) return Matrix::Identity(dim, dim);
    {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        auto it = cache_->flips.find({m_pow, n_pow});
        if (it != cache_->flips.end()) return it->second;
    }
    // t_{1,n} moves one E factor through n F factors, innermost swap first.
    Matrix t1n = Matrix::Identity(u_.n * ipow(u_.m, n_pow), u_.n * ipow(u_.m, n_pow));
    for (Eigen::Index s = 0; s < n_pow; ++s) {
        const Matrix step = kron(Matrix::Identity(ipow(u_.m, s), ipow(u_.m, s)),
                                 kron(t11_, Matrix::Identity(ipow(u_.m, n_pow - 1 - s),
                                                             ipow(u_.m, n_pow - 1 - s))));
        t1n = step * t1n;
    }
    Matrix out = t1n;
    if (m_pow > 1) {
        // t_{m,n} moves the E block one factor at a time, rightmost E first.
        out = Matrix::Identity(dim, dim);
        for (Eigen::Index s = 0; s < m_pow; ++s) {
            const Eigen::Index before = ipow(u_.n, m_pow - 1 - s);
            const Eigen::Index after = ipow(u_.n, s);
            const Matrix step = kron(Matrix::Identity(before, before),
                                     kron(t1n, Matrix::Identity(after, after)));
            out = step * out;
        }
    }
    std::lock_guard<std::mutex> lock(cache_->mutex);
    cache_->flips.emplace(std::make_pair(m_pow, n_pow), out);
    return out;
}

void validate_rep(const ScalarProductSystem& sys, const CovariantRep& rep,
                  const Tolerance& tol) {
    if (rep.h <= 0) throw Error(ErrorCode::invalid_input, "representation needs h >= 1");
    if (static_cast<Eigen::Index>(rep.T.size()) != sys.n() ||
        static_cast<Eigen::Index>(rep.S.size()) != sys.m())
        throw Error(ErrorCode::invalid_input, "tuple sizes do not match the system");
    for (const auto& op : rep.T)
        if (op.rows() != rep.h || op.cols() != rep.h)
            throw Error(ErrorCode::invalid_input, "T operator is not h x h");
    for (const auto& op : rep.S)
        if (op.rows() != rep.h || op.cols() != rep.h)
            throw Error(ErrorCode::invalid_input, "S operator is not h x h");
    if (operator_norm(row_matrix(rep, Side::T, 1)) > 1.0 + tol.accept_eps ||
        operator_norm(row_matrix(rep, Side::S, 1)) > 1.0 + tol.accept_eps)
        throw Error(ErrorCode::invalid_input, "tuple rows are not contractive");
}

Matrix row_matrix(const CovariantRep& rep, Side side, Eigen::Index k) {
    if (k < 0) throw Error(ErrorCode::invalid_input, "word length must be nonnegative");
    const auto& ops = side == Side::T ? rep.T : rep.S;
    const Eigen::Index count = static_cast<Eigen::Index>(ops.size());
    Matrix row = Matrix::Identity(rep.h, rep.h);
    for (Eigen::Index step = 0; step < k; ++step) {
        // row holds the length-step block row; prepend one more letter.
        Matrix next(rep.h, count * row.cols());
        for (Eigen::Index i = 0; i < count; ++i)
            next.middleCols(i * row.cols(), row.cols()) = ops[i] * row;
        row = std::move(next);
    }
    return row;
}

double commutation_residual(const ScalarProductSystem& sys, const CovariantRep& rep,
                            Eigen::Index m_pow, Eigen::Index n_pow) {
    const Eigen::Index ne = ipow(sys.n(), m_pow);
    const Eigen::Index mf = ipow(sys.m(), n_pow);
    const Matrix tm = row_matrix(rep, Side::T, m_pow);
    const Matrix sn = row_matrix(rep, Side::S, n_pow);
    const Matrix ih = Matrix::Identity(rep.h, rep.h);
    const Matrix lhs = tm * kron(Matrix::Identity(ne, ne), sn);
    const Matrix rhs =
        sn * kron(Matrix::Identity(mf, mf), tm) * kron(sys.flip_mn(m_pow, n_pow), ih);
    return (lhs - rhs).norm();
}

std::pair<KrausFamily, KrausFamily> induced_cp_pair(const CovariantRep& rep) {
    KrausFamily theta{rep.h, rep.T};
    KrausFamily phi{rep.h, rep.S};
    return {theta, phi};
}

json system_to_json(const ScalarProductSystem& sys) {
    return json{{"n", sys.n()}, {"m", sys.m()}, {"u", matrix_to_json(sys.unitary().u)}};
}

ScalarProductSystem system_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("m") || !j.contains("u"))
        throw Error(ErrorCode::parse_error, "system JSON needs n, m, u");
    FlipUnitary u;
    u.n = j.at("n").get<Eigen::Index>();
    u.m = j.at("m").get<Eigen::Index>();
    u.u = matrix_from_json(j.at("u"));
    return make_system(u);
}

json rep_to_json(const CovariantRep& rep) {
    json t = json::array();
    json s = json::array();
    for (const auto& op : rep.T) t.push_back(matrix_to_json(op));
    for (const auto& op : rep.S) s.push_back(matrix_to_json(op));
    return json{{"h", rep.h}, {"T", std::move(t)}, {"S", std::move(s)}};
}

CovariantRep rep_from_json(const json& j) {
    if (!j.is_object() || !j.contains("h") || !j.contains("T") || !j.contains("S"))
        throw Error(ErrorCode::parse_error, "representation JSON needs h, T, S");
    CovariantRep rep;
    rep.h = j.at("h").get<Eigen::Index>();
    if (!j.at("T").is_array() || !j.at("S").is_array() || j.at("T").empty() ||
        j.at("S").empty())
        throw Error(ErrorCode::parse_error, "representation tuples must be nonempty arrays");
    for (const auto& op : j.at("T")) rep.T.push_back(matrix_from_json(op));
    for (const auto& op : j.at("S")) rep.S.push_back(matrix_from_json(op));
    return rep;
}

}  // namespace cpdil
