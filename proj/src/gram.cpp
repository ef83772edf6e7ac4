#include "cpdil/gram.hpp"

#include <algorithm>
#include <cmath>

namespace cpdil {

// Values of the map on all matrix units, units[q * d + q'] = map(E_qq').
static std::vector<Matrix> unit_table(const KrausFamily& fam) {
    const Eigen::Index d = fam.d;
    std::vector<Matrix> out;
    out.reserve(d * d);
    for (Eigen::Index q = 0; q < d; ++q)
        for (Eigen::Index qp = 0; qp < d; ++qp) {
            Matrix e = Matrix::Zero(d, d);
            e(q, qp) = 1.0;
            out.push_back(apply_cp(fam, e));
        }
    return out;
}

static Eigen::Index gram_rank(const Matrix& g, const Tolerance& tol) {
    if (g.rows() == 0) return 0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    const Eigen::VectorXd lam = es.eigenvalues();
    const double lmax = lam.cwiseAbs().maxCoeff();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam(i) > tol.rank_eps * lmax && lam(i) > 0.0) ++rank;
    return rank;
}

GramSpace gram_tensor_space(const KrausFamily& theta, const KrausFamily& phi,
                            TensorOrder order, const Tolerance& tol) {
    const Eigen::Index d = theta.d;
    if (phi.d != d) throw Error(ErrorCode::invalid_input, "gram_tensor_space dim mismatch");
    if (d > kMaxGramDim)
        throw Error(ErrorCode::too_large, "gram_tensor_space supports d <= 3");
    // In the inner product theta(b^* phi(a^* a') b') the a-slot is coupled by
    // phi and the b/h-slot by theta; theta_phi swaps the coupling maps.
    const KrausFamily& a_map = order == TensorOrder::phi_theta ? phi : theta;
    const KrausFamily& b_map = order == TensorOrder::phi_theta ? theta : phi;
    const std::vector<Matrix> au = unit_table(a_map);
    const std::vector<Matrix> bu = unit_table(b_map);
    const Eigen::Index dim = d * d * d * d * d;
    GramSpace out;
    out.d = d;
    out.order = order;
    out.gram.resize(dim, dim);
    auto idx = [d](Eigen::Index p, Eigen::Index q, Eigen::Index r, Eigen::Index s,
                   Eigen::Index t) { return (((p * d + q) * d + r) * d + s) * d + t; };
    for (Eigen::Index p = 0; p < d; ++p)
        for (Eigen::Index q = 0; q < d; ++q)
            for (Eigen::Index r = 0; r < d; ++r)
                for (Eigen::Index s = 0; s < d; ++s)
                    for (Eigen::Index t = 0; t < d; ++t)
                        for (Eigen::Index pp = 0; pp < d; ++pp)
                            for (Eigen::Index qp = 0; qp < d; ++qp)
                                for (Eigen::Index rp = 0; rp < d; ++rp)
                                    for (Eigen::Index sp = 0; sp < d; ++sp)
                                        for (Eigen::Index tp = 0; tp < d; ++tp)
                                            out.gram(idx(p, q, r, s, t),
                                                     idx(pp, qp, rp, sp, tp)) =
                                                (p == pp ? au[q * d + qp](r, rp) *
                                                               bu[s * d + sp](t, tp)
                                                         : Complex(0.0));
    out.rank = gram_rank(out.gram, tol);
    return out;
}

StrongCommuteReport strong_commute_direct(const KrausFamily& theta, const KrausFamily& phi,
                                          const Tolerance& tol) {
    const Eigen::Index d = theta.d;
    const GramSpace g1 = gram_tensor_space(theta, phi, TensorOrder::phi_theta, tol);
    const GramSpace g2 = gram_tensor_space(theta, phi, TensorOrder::theta_phi, tol);
    // Gram matrices of the special vectors a (x) I (x) h collapse to the two
    // composition orders evaluated on matrix units.
    const Eigen::Index sdim = d * d * d;
    Matrix s1(sdim, sdim), s2(sdim, sdim);
    auto sidx = [d](Eigen::Index p, Eigen::Index q, Eigen::Index t) {
        return (p * d + q) * d + t;
    };
    const KrausFamily tp = compose_cp(theta, phi);
    const KrausFamily pt = compose_cp(phi, theta);
    const std::vector<Matrix> tpu = unit_table(tp);
    const std::vector<Matrix> ptu = unit_table(pt);
    for (Eigen::Index p = 0; p < d; ++p)
        for (Eigen::Index q = 0; q < d; ++q)
            for (Eigen::Index t = 0; t < d; ++t)
                for (Eigen::Index pp = 0; pp < d; ++pp)
                    for (Eigen::Index qp = 0; qp < d; ++qp)
                        for (Eigen::Index t2 = 0; t2 < d; ++t2) {
                            s1(sidx(p, q, t), sidx(pp, qp, t2)) =
                                p == pp ? tpu[q * d + qp](t, t2) : Complex(0.0);
                            s2(sidx(p, q, t), sidx(pp, qp, t2)) =
                                p == pp ? ptu[q * d + qp](t, t2) : Complex(0.0);
                        }
    StrongCommuteReport out;
    out.isometry_residual = (s1 - s2).norm();
    out.complement_phi_theta = g1.rank - gram_rank(s1, tol);
    out.complement_theta_phi = g2.rank - gram_rank(s2, tol);
    out.verdict = out.isometry_residual <= tol.accept_eps * std::max(1.0, s1.norm()) &&
                  out.complement_phi_theta == out.complement_theta_phi;
    return out;
}

IntertwinerSpace intertwiner_space(const KrausFamily& theta, const Tolerance& tol) {
    const Eigen::Index d = theta.d;
    if (d > kMaxIntertwinerDim)
        throw Error(ErrorCode::too_large, "intertwiner_space supports d <= 5");
    const std::vector<Matrix> tu = unit_table(theta);
    const Eigen::Index gdim = d * d * d;  // generators (p, q, t) for E_pq (x) e_t
    Matrix gram(gdim, gdim);
    auto gidx = [d](Eigen::Index p, Eigen::Index q, Eigen::Index t) {
        return (p * d + q) * d + t;
    };
    for (Eigen::Index p = 0; p < d; ++p)
        for (Eigen::Index q = 0; q < d; ++q)
            for (Eigen::Index t = 0; t < d; ++t)
                for (Eigen::Index pp = 0; pp < d; ++pp)
                    for (Eigen::Index qp = 0; qp < d; ++qp)
                        for (Eigen::Index t2 = 0; t2 < d; ++t2)
                            gram(gidx(p, q, t), gidx(pp, qp, t2)) =
                                p == pp ? tu[q * d + qp](t, t2) : Complex(0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    const Eigen::VectorXd lam = es.eigenvalues();
    const double lmax = lam.size() > 0 ? lam.cwiseAbs().maxCoeff() : 0.0;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = lam.size() - 1; i >= 0; --i)
        if (lam(i) > tol.rank_eps * lmax && lam(i) > 0.0) keep.push_back(i);
    const Eigen::Index rho = static_cast<Eigen::Index>(keep.size());
    IntertwinerSpace out;
    out.space_dim = rho;
    if (rho == 0) return out;
    Matrix basisv(gdim, rho);
    Eigen::VectorXd nu(rho);
    for (Eigen::Index a = 0; a < rho; ++a) {
        basisv.col(a) = es.eigenvectors().col(keep[a]);
        nu(a) = lam(keep[a]);
    }
    // phi maps generator coefficients to coordinates isometrically, pinv is a
    // right inverse landing in the non-null eigenspace.
    const Matrix phi_map = nu.cwiseSqrt().asDiagonal() * basisv.adjoint();
    const Matrix pinv = basisv * nu.cwiseSqrt().cwiseInverse().asDiagonal();

    // Left multiplication by E_uv on generators: (p,q,t) -> delta_vp (u,q,t).
    std::vector<Matrix> left(d * d);
    for (Eigen::Index u = 0; u < d; ++u)
        for (Eigen::Index v = 0; v < d; ++v) {
            Matrix act = Matrix::Zero(gdim, gdim);
            for (Eigen::Index q = 0; q < d; ++q)
                for (Eigen::Index t = 0; t < d; ++t) act(gidx(u, q, t), gidx(v, q, t)) = 1.0;
            left[u * d + v] = phi_map * act * pinv;
        }
    // Stack the intertwining constraints X E_uv - L_uv X = 0 over column-major
    // vec(X) with X of shape rho x d.
    Matrix constraints(d * d * rho * d, rho * d);
    for (Eigen::Index u = 0; u < d; ++u)
        for (Eigen::Index v = 0; v < d; ++v) {
            Matrix euv = Matrix::Zero(d, d);
            euv(u, v) = 1.0;
            const Matrix block = kron(euv.transpose(), Matrix::Identity(rho, rho)) -
                                 kron(Matrix::Identity(d, d), left[u * d + v]);
            constraints.middleRows((u * d + v) * rho * d, rho * d) = block;
        }
    const KernelRange kr = kernel_and_range(constraints, tol);
    // W h = I (x) h in generator coefficients.
    Matrix wcoef = Matrix::Zero(gdim, d);
    for (Eigen::Index t = 0; t < d; ++t)
        for (Eigen::Index r = 0; r < d; ++r) wcoef(gidx(r, r, t), t) = 1.0;
    const Matrix w = phi_map * wcoef;
    const double sqrt_d = std::sqrt(static_cast<double>(d));
    for (Eigen::Index b = 0; b < kr.kernel.cols(); ++b) {
        Matrix x(rho, d);
        for (Eigen::Index c = 0; c < d; ++c) x.col(c) = kr.kernel.col(b).segment(c * rho, rho);
        x *= sqrt_d;  // Frobenius-normalized kernel vectors scale to X^* X = I
        Matrix t_op = w.adjoint() * x;
        // Deterministic phase: first significant entry of the recovered Kraus
        // operator made real positive.
        Complex phase(1.0, 0.0);
        const double mx = t_op.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < d && mx > 0.0; ++i) {
            bool done = false;
            for (Eigen::Index j = 0; j < d; ++j)
                if (std::abs(t_op(i, j)) >= 0.5 * mx) {
                    phase = std::conj(t_op(i, j)) / std::abs(t_op(i, j));
                    done = true;
                    break;
                }
            if (done) break;
        }
        out.basis.push_back(phase * x);
        out.rep.push_back(phase * t_op);
    }
    return out;
}

}  // namespace cpdil
