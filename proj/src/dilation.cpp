#include "cpdil/dilation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include <Eigen/QR>

namespace cpdil {

namespace {

Eigen::Index ipow(Eigen::Index base, Eigen::Index exp) {
    Eigen::Index out = 1;
    for (Eigen::Index i = 0; i < exp; ++i) out *= base;
    return out;
}

Matrix identity(Eigen::Index d) { return Matrix::Identity(d, d); }

// First-coordinate selector C^{wide} -> C^{narrow} (narrow <= wide); its
// adjoint is the isometric embedding used to grow an H slot by one level.
Matrix selector(Eigen::Index narrow, Eigen::Index wide) {
    Matrix q = Matrix::Zero(narrow, wide);
    q.topLeftCorner(narrow, narrow) = identity(narrow);
    return q;
}

void scatter_dense(std::vector<Triplet>& out, const Matrix& block, Eigen::Index row0,
                   const std::function<Eigen::Index(Eigen::Index)>& col_map) {
    for (Eigen::Index c = 0; c < block.cols(); ++c)
        for (Eigen::Index r = 0; r < block.rows(); ++r)
            if (block(r, c) != Complex(0.0, 0.0))
                out.emplace_back(row0 + r, col_map(c), block(r, c));
}

double sparse_isometry_residual(const SparseMatrix& v) {
    SparseMatrix g = (SparseMatrix(v.adjoint()) * v).pruned();
    double s = 0.0;
    std::vector<bool> diag_seen(g.cols(), false);
    for (Eigen::Index c = 0; c < g.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(g, c); it; ++it) {
            Complex val = it.value();
            if (it.row() == c) {
                val -= 1.0;
                diag_seen[c] = true;
            }
            s += std::norm(val);
        }
    for (Eigen::Index c = 0; c < g.cols(); ++c)
        if (!diag_seen[c]) s += 1.0;
    return std::sqrt(s);
}

}  // namespace

PrimitiveIsometries build_primitive_isometries(const ScalarProductSystem& sys,
                                               const CovariantRep& rep,
                                               const GradedFockSpace& space,
                                               const Tolerance& tol) {
    validate_rep(sys, rep, tol);
    if (space.n != sys.n() || space.m != sys.m() || space.d_h != rep.h)
        throw Error(ErrorCode::invalid_input, "graded space was built for different data");
    if (space.levels < 1)
        throw Error(ErrorCode::invalid_input, "primitive shifts need at least one level");

    const Eigen::Index n = sys.n();
    const Eigen::Index m = sys.m();
    const Eigen::Index L = space.levels;
    const Eigen::Index dlow = space.dim_upto(L - 1);
    const Eigen::Index total = space.total_dim;
    const Eigen::Index dh = rep.h;

    const Matrix ttilde = row_matrix(rep, Side::T, 1);
    const Matrix stilde = row_matrix(rep, Side::S, 1);
    Matrix delta_t, delta_s;
    try {
        delta_t = psd_sqrt(identity(n * dh) - ttilde.adjoint() * ttilde, tol);
        delta_s = psd_sqrt(identity(m * dh) - stilde.adjoint() * stilde, tol);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::not_positive)
            throw Error(ErrorCode::not_contractive,
                        "defect of a tuple row is not positive semidefinite");
        throw;
    }

    std::vector<Triplet> vt;
    std::vector<Triplet> ut;

    for (const auto& blk : space.blocks) {
        if (std::max(blk.a, blk.b) > L - 1) continue;
        const Eigen::Index in_block = blk.size();
        const Eigen::Index hd_in = blk.h_dim;

        // ---- e-side shift on this grade ----
        if (blk.a >= 1) {
            // Pure word inclusion (a, b) -> (a + 1, b), new letter leftmost.
            const auto& out = space.block(blk.a + 1, blk.b);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index we = 0; we < blk.e_dim; ++we)
                    for (Eigen::Index wf = 0; wf < blk.f_dim; ++wf)
                        for (Eigen::Index h = 0; h < hd_in; ++h) {
                            const Eigen::Index col =
                                i * dlow + blk.offset + (we * blk.f_dim + wf) * hd_in + h;
                            const Eigen::Index row =
                                out.offset +
                                ((i * blk.e_dim + we) * out.f_dim + wf) * out.h_dim + h;
                            vt.emplace_back(row, col, Complex(1.0, 0.0));
                        }
        } else {
            // Grade (0, b): flip the new letter through the f-word, absorb it
            // through the tuple row into the same grade, emit the defect into
            // grade (1, b), and flip the defect copy back into word order.
            const auto& top = blk;                       // target (0, b)
            const auto& bot = space.block(1, blk.b);     // target (1, b)
            const Eigen::Index hd_bot = bot.h_dim;
            const Matrix q0 = selector(dh, hd_in);
            const Matrix v0top = q0.adjoint() * ttilde * kron(identity(n), q0);
            Matrix v0bot = kron(identity(n), selector(dh, hd_bot).adjoint()) * delta_t *
                           kron(identity(n), q0);
            if (hd_bot == hd_in)
                v0bot += identity(n * hd_in) - kron(identity(n), q0.adjoint() * q0);
            const Matrix t1b = sys.flip_mn(1, blk.b);
            const Matrix pre = kron(t1b, identity(hd_in));
            const Matrix mtop = kron(identity(blk.f_dim), v0top) * pre;
            const Matrix mbot = kron(t1b.adjoint(), identity(hd_bot)) *
                                kron(identity(blk.f_dim), v0bot) * pre;
            const auto col_map = [&](Eigen::Index c) {
                const Eigen::Index i = c / in_block;
                return i * dlow + blk.offset + (c % in_block);
            };
            scatter_dense(vt, mtop, top.offset, col_map);
            scatter_dense(vt, mbot, bot.offset, col_map);
        }

        // ---- f-side shift on this grade ----
        const Matrix ta1 = sys.flip_mn(blk.a, 1);  // E^a (x) F -> F (x) E^a
        if (blk.b >= 1) {
            // Flip the new letter through the e-word, then include it as the
            // leftmost f-letter: (a, b) -> (a, b + 1).
            const auto& out = space.block(blk.a, blk.b + 1);
            const Matrix ta1inv = ta1.adjoint();
            for (Eigen::Index j = 0; j < m; ++j)
                for (Eigen::Index we = 0; we < blk.e_dim; ++we) {
                    const Eigen::Index fcol = j * blk.e_dim + we;
                    for (Eigen::Index wep = 0; wep < blk.e_dim; ++wep)
                        for (Eigen::Index jp = 0; jp < m; ++jp) {
                            const Complex coef = ta1inv(wep * m + jp, fcol);
                            if (coef == Complex(0.0, 0.0)) continue;
                            for (Eigen::Index wf = 0; wf < blk.f_dim; ++wf)
                                for (Eigen::Index h = 0; h < hd_in; ++h) {
                                    const Eigen::Index col =
                                        j * dlow + blk.offset +
                                        (we * blk.f_dim + wf) * hd_in + h;
                                    const Eigen::Index row =
                                        out.offset +
                                        (wep * out.f_dim + (jp * blk.f_dim + wf)) *
                                            out.h_dim +
                                        h;
                                    ut.emplace_back(row, col, coef);
                                }
                        }
                }
        } else {
            // Grade (a, 0): flip the letter through the e-word, absorb it
            // through the S row into the same grade, defect into grade (a, 1).
            const auto& top = blk;                       // target (a, 0)
            const auto& bot = space.block(blk.a, 1);     // target (a, 1)
            const Eigen::Index hd_bot = bot.h_dim;
            const Matrix q0 = selector(dh, hd_in);
            const Matrix u0top = q0.adjoint() * stilde * kron(identity(m), q0);
            Matrix u0bot = kron(identity(m), selector(dh, hd_bot).adjoint()) * delta_s *
                           kron(identity(m), q0);
            if (hd_bot == hd_in)
                u0bot += identity(m * hd_in) - kron(identity(m), q0.adjoint() * q0);
            const Matrix pre = kron(ta1.adjoint(), identity(hd_in));
            const Matrix mtop = kron(identity(blk.e_dim), u0top) * pre;
            const Matrix mbot = kron(identity(blk.e_dim), u0bot) * pre;
            const auto col_map = [&](Eigen::Index c) {
                const Eigen::Index j = c / in_block;
                return j * dlow + blk.offset + (c % in_block);
            };
            scatter_dense(ut, mtop, top.offset, col_map);
            scatter_dense(ut, mbot, bot.offset, col_map);
        }
    }

    PrimitiveIsometries prim;
    prim.v2 = SparseMatrix(total, n * dlow);
    prim.v2.setFromTriplets(vt.begin(), vt.end());
    prim.u2 = SparseMatrix(total, m * dlow);
    prim.u2.setFromTriplets(ut.begin(), ut.end());

    const double rv = sparse_isometry_residual(prim.v2);
    const double ru = sparse_isometry_residual(prim.u2);
    const double bound = tol.accept_eps * std::sqrt(static_cast<double>(dlow * (n + m)));
    if (rv > bound || ru > bound)
        throw Error(ErrorCode::construction_failed,
                    "primitive shift is not isometric (residuals " + std::to_string(rv) +
                        ", " + std::to_string(ru) + ")");
    return prim;
}

CorrectorChain build_corrector(const ScalarProductSystem& sys, const GradedFockSpace& space,
                               const PrimitiveIsometries& prim, const Tolerance& tol) {
    const Eigen::Index n = sys.n();
    const Eigen::Index m = sys.m();
    const Eigen::Index L = space.levels;
    if (L < 1) throw Error(ErrorCode::invalid_input, "corrector chain needs L >= 1");
    const Eigen::Index dlow = space.dim_upto(L - 1);
    const Eigen::Index total = space.total_dim;
    const Matrix& t11 = sys.t11();

    CorrectorChain corr;
    corr.blocks.resize(L + 1);
    corr.residual_level.assign(L + 1, 0.0);
    corr.blocks[0] = identity(space.level_dim(0));
    // The top level is never corrected; an empty matrix stands for the
    // identity so the chain stays small when the top level is large.
    corr.blocks[L] = Matrix();

    for (Eigen::Index k = 0; k + 1 <= L - 1; ++k) {
        const Eigen::Index ldk = space.level_dim(k);
        const Eigen::Index ld1 = space.level_dim(k + 1);
        const Eigen::Index off_k = space.level_offset[k];
        const Eigen::Index off_1 = space.level_offset[k + 1];
        const Eigen::Index cols = n * m * ldk;
        Matrix a = Matrix::Zero(total, cols);
        Matrix b = Matrix::Zero(total, cols);
        const Matrix winv = corr.blocks[k].adjoint();

        std::vector<Vector> vraw(n);
        for (Eigen::Index c = 0; c < ldk; ++c) {
            // Corrected side: undo W(k), append an f-letter, then an e-letter.
            Vector xw = Vector::Zero(dlow);
            xw.segment(off_k, ldk) = winv.col(c);
            for (Eigen::Index j = 0; j < m; ++j) {
                Vector dom = Vector::Zero(m * dlow);
                dom.segment(j * dlow, dlow) = xw;
                const Vector uvec = prim.u2 * dom;
                const Vector ucut = uvec.head(dlow);
                for (Eigen::Index i = 0; i < n; ++i) {
                    Vector dom2 = Vector::Zero(n * dlow);
                    dom2.segment(i * dlow, dlow) = ucut;
                    a.col((i * m + j) * ldk + c) = prim.v2 * dom2;
                }
            }
            // Exchanged side: raw basis vector, e-letter first, then f-letter,
            // recombined through the exchange matrix.
            for (Eigen::Index kk = 0; kk < n; ++kk) {
                Vector dom = Vector::Zero(n * dlow);
                dom(kk * dlow + off_k + c) = 1.0;
                vraw[kk] = prim.v2 * dom;
            }
            std::vector<Vector> uv(m * n);
            for (Eigen::Index l = 0; l < m; ++l)
                for (Eigen::Index kk = 0; kk < n; ++kk) {
                    Vector dom = Vector::Zero(m * dlow);
                    dom.segment(l * dlow, dlow) = vraw[kk].head(dlow);
                    uv[l * n + kk] = prim.u2 * dom;
                }
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < m; ++j) {
                    Vector acc = Vector::Zero(total);
                    for (Eigen::Index l = 0; l < m; ++l)
                        for (Eigen::Index kk = 0; kk < n; ++kk) {
                            const Complex coef = t11(l * n + kk, i * m + j);
                            if (coef != Complex(0.0, 0.0)) acc += coef * uv[l * n + kk];
                        }
                    b.col((i * m + j) * ldk + c) = acc;
                }
        }

        // Everything outside level k+1 must already agree on both sides; a
        // violation means the tuple does not satisfy the exchange relation.
        Matrix diff = a - b;
        diff.middleRows(off_1, ld1).setZero();
        const double guard = diff.norm();
        if (guard > tol.accept_eps * std::sqrt(static_cast<double>(std::max<Eigen::Index>(cols, 1))))
            throw Error(ErrorCode::construction_failed,
                        "commutation fails at corrector level " + std::to_string(k + 1) +
                            " (exchange relation residual " + std::to_string(guard) + ")");

        const Matrix ak = a.middleRows(off_1, ld1);
        const Matrix bk = b.middleRows(off_1, ld1);

        Eigen::ColPivHouseholderQR<Matrix> qr(ak);
        const Matrix rmat = qr.matrixR();
        Eigen::Index rank = 0;
        const double r00 = rmat.rows() > 0 && rmat.cols() > 0 ? std::abs(rmat(0, 0)) : 0.0;
        const Eigen::Index rmax = std::min<Eigen::Index>(ak.rows(), ak.cols());
        while (rank < rmax && std::abs(rmat(rank, rank)) > tol.rank_eps * r00 &&
               std::abs(rmat(rank, rank)) > 0.0)
            ++rank;

        Matrix wblk;
        double match = 0.0;
        if (rank == 0) {
            wblk = identity(ld1);
            match = bk.norm();
        } else {
            const Matrix qthin = qr.householderQ() * Matrix::Identity(ld1, rank);
            Matrix xr = Matrix::Zero(cols, rank);
            xr.topRows(rank) = rmat.topLeftCorner(rank, rank)
                                   .triangularView<Eigen::Upper>()
                                   .solve(Matrix::Identity(rank, rank));
            const Matrix x = qr.colsPermutation() * xr;
            const Matrix cmat = bk * x;
            const double ciso = (cmat.adjoint() * cmat - identity(rank)).norm();
            if (ciso > tol.accept_eps * std::max(1.0, std::sqrt(static_cast<double>(rank))))
                throw Error(ErrorCode::construction_failed,
                            "corrector image matching at level " + std::to_string(k + 1) +
                                " is not isometric (residual " + std::to_string(ciso) +
                                "); the exchange relation fails on the tuple");
            const Matrix qc = orthonormal_complement(qthin, ld1);
            const Matrix cc = orthonormal_complement(cmat, ld1);
            wblk = cmat * qthin.adjoint();
            if (qc.cols() > 0) wblk += cc * qc.adjoint();
            match = (wblk * ak - bk).norm();
        }
        corr.blocks[k + 1] = wblk;
        corr.residual_level[k + 1] = std::sqrt(guard * guard + match * match);
    }
    return corr;
}

std::pair<std::vector<SparseMatrix>, std::vector<SparseMatrix>> assemble_operators(
    const GradedFockSpace& space, const PrimitiveIsometries& prim,
    const CorrectorChain& corrector) {
    const Eigen::Index L = space.levels;
    const Eigen::Index total = space.total_dim;
    const Eigen::Index dlow = space.dim_upto(L - 1);
    const Eigen::Index n = space.n;
    const Eigen::Index m = space.m;
    if (static_cast<Eigen::Index>(corrector.blocks.size()) != L + 1)
        throw Error(ErrorCode::invalid_input, "corrector chain has the wrong length");

    std::vector<Triplet> wt, wit;
    for (Eigen::Index k = 0; k <= L; ++k) {
        const Matrix& blk = corrector.blocks[k];
        const Eigen::Index off = space.level_offset[k];
        if (blk.size() == 0) {
            // Empty block = identity on this level.
            for (Eigen::Index r = 0; r < space.level_dim(k); ++r) {
                wt.emplace_back(off + r, off + r, Complex(1.0, 0.0));
                wit.emplace_back(off + r, off + r, Complex(1.0, 0.0));
            }
            continue;
        }
        if (blk.rows() != space.level_dim(k) || blk.cols() != space.level_dim(k))
            throw Error(ErrorCode::invalid_input, "corrector block has the wrong size");
        for (Eigen::Index c = 0; c < blk.cols(); ++c)
            for (Eigen::Index r = 0; r < blk.rows(); ++r) {
                if (blk(r, c) != Complex(0.0, 0.0))
                    wt.emplace_back(off + r, off + c, blk(r, c));
                if (blk(c, r) != Complex(0.0, 0.0))
                    wit.emplace_back(off + r, off + c, std::conj(blk(c, r)));
            }
    }
    SparseMatrix w(total, total), winv(total, total);
    w.setFromTriplets(wt.begin(), wt.end());
    winv.setFromTriplets(wit.begin(), wit.end());

    const auto slice = [&](const SparseMatrix& big, Eigen::Index letter) {
        std::vector<Triplet> trips;
        for (Eigen::Index c = letter * dlow; c < (letter + 1) * dlow; ++c)
            for (SparseMatrix::InnerIterator it(big, c); it; ++it)
                trips.emplace_back(it.row(), c - letter * dlow, it.value());
        SparseMatrix out(total, total);
        out.setFromTriplets(trips.begin(), trips.end());
        return out;
    };

    std::vector<SparseMatrix> v(n), u(m);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = (w * slice(prim.v2, i)).pruned();
    for (Eigen::Index j = 0; j < m; ++j) u[j] = (slice(prim.u2, j) * winv).pruned();
    return {std::move(v), std::move(u)};
}

DilationResult assemble_dilation(const ScalarProductSystem& sys, const CovariantRep& rep,
                                 Eigen::Index levels, Eigen::Index mu, const Tolerance& tol,
                                 Eigen::Index dim_cap) {
    if (levels < 2)
        throw Error(ErrorCode::invalid_input, "dilation needs truncation depth L >= 2");
    DilationResult result;
    result.sys = sys;
    result.rep = rep;
    result.space = build_graded_space(sys, rep.h, levels, mu, dim_cap);
    result.prim = build_primitive_isometries(sys, rep, result.space, tol);
    result.corrector = build_corrector(sys, result.space, result.prim, tol);
    auto ops = assemble_operators(result.space, result.prim, result.corrector);
    result.V = std::move(ops.first);
    result.U = std::move(ops.second);
    result.valid_depth = levels - 1;

    const Report check = verify_dilation(result, std::min<Eigen::Index>(2, levels - 2), tol);
    if (!check.pass) {
        for (const auto& id : check.identities)
            if (!(id.max_residual <= tol.accept_eps))
                throw Error(ErrorCode::construction_failed,
                            "dilation contract '" + id.name + "' has residual " +
                                std::to_string(id.max_residual) + " on " + id.window);
    }
    return result;
}

Matrix embed_h(const GradedFockSpace& space) {
    Matrix emb = Matrix::Zero(space.total_dim, space.d_h);
    emb.topLeftCorner(space.d_h, space.d_h) = identity(space.d_h);
    return emb;
}

Matrix compress_word(const DilationResult& result, const std::vector<Letter>& word) {
    const Eigen::Index dh = result.space.d_h;
    if (static_cast<Eigen::Index>(word.size()) > 64)
        throw Error(ErrorCode::invalid_input, "word is unreasonably long");
    Matrix state = Matrix::Zero(dh, result.space.total_dim);
    state.topLeftCorner(dh, dh) = identity(dh);
    for (const auto& [side, idx] : word) {
        const auto& ops = side == Side::T ? result.V : result.U;
        if (idx < 0 || idx >= static_cast<Eigen::Index>(ops.size()))
            throw Error(ErrorCode::invalid_input, "letter index out of range");
        state = state * ops[idx];
    }
    return state.leftCols(dh);
}

Matrix expected_word(const CovariantRep& rep, const std::vector<Letter>& word) {
    Matrix out = identity(rep.h);
    for (const auto& [side, idx] : word) {
        const auto& ops = side == Side::T ? rep.T : rep.S;
        if (idx < 0 || idx >= static_cast<Eigen::Index>(ops.size()))
            throw Error(ErrorCode::invalid_input, "letter index out of range");
        out = out * ops[idx];
    }
    return out;
}

namespace {

// Frobenius norm of (top-left rows x cols block of g) - (scale * identity).
double block_residual(const SparseMatrix& g, Eigen::Index rows, Eigen::Index cols,
                      bool subtract_identity) {
    double s = 0.0;
    std::vector<bool> diag_seen(subtract_identity ? std::min(rows, cols) : 0, false);
    for (Eigen::Index c = 0; c < std::min<Eigen::Index>(cols, g.outerSize()); ++c)
        for (SparseMatrix::InnerIterator it(g, c); it; ++it) {
            if (it.row() >= rows) continue;
            Complex val = it.value();
            if (subtract_identity && it.row() == c) {
                val -= 1.0;
                diag_seen[c] = true;
            }
            s += std::norm(val);
        }
    if (subtract_identity)
        for (Eigen::Index c = 0; c < std::min(rows, cols); ++c)
            if (!diag_seen[c]) s += 1.0;
    return std::sqrt(s);
}

// Frobenius norm of the (rows x [col0, col0+cols)) band of g.
double band_residual(const SparseMatrix& g, Eigen::Index rows, Eigen::Index col0,
                     Eigen::Index cols) {
    double s = 0.0;
    for (Eigen::Index c = col0; c < col0 + cols && c < g.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(g, c); it; ++it)
            if (it.row() < rows) s += std::norm(it.value());
    return std::sqrt(s);
}

}  // namespace

Report verify_dilation(const DilationResult& result, Eigen::Index depth,
                       const Tolerance& tol) {
    const Eigen::Index L = result.space.levels;
    if (depth < 0 || depth > result.valid_depth - 1)
        throw Error(ErrorCode::invalid_input,
                    "verification depth must lie in [0, valid_depth - 1]");
    const Eigen::Index n = result.sys.n();
    const Eigen::Index m = result.sys.m();
    const Eigen::Index dh = result.space.d_h;
    const Eigen::Index dlow = result.space.dim_upto(L - 1);
    const Eigen::Index dwin = result.space.dim_upto(L - 2);
    const Matrix& uflip = result.sys.unitary().u;

    Report report;

    // Corner identities over all mixed words up to max(1, depth) letters.
    const Eigen::Index word_depth = std::max<Eigen::Index>(1, depth);
    double corner = 0.0;
    std::function<void(const Matrix&, const Matrix&, Eigen::Index)> dfs =
        [&](const Matrix& state, const Matrix& expected, Eigen::Index remaining) {
            corner = std::max(corner, (state.leftCols(dh) - expected).norm());
            if (remaining == 0) return;
            for (Eigen::Index i = 0; i < n; ++i)
                dfs(state * result.V[i], expected * result.rep.T[i], remaining - 1);
            for (Eigen::Index j = 0; j < m; ++j)
                dfs(state * result.U[j], expected * result.rep.S[j], remaining - 1);
        };
    Matrix root = Matrix::Zero(dh, result.space.total_dim);
    root.topLeftCorner(dh, dh) = identity(dh);
    dfs(root, identity(dh), word_depth);
    report.add("corner", corner, "words of length <= " + std::to_string(word_depth),
               tol.accept_eps);

    // Isometry and range orthogonality on K[L-1], both tuples.
    double iso = 0.0, ortho = 0.0;
    const auto pair_scan = [&](const std::vector<SparseMatrix>& ops) {
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(ops.size()); ++i)
            for (Eigen::Index j = i; j < static_cast<Eigen::Index>(ops.size()); ++j) {
                const SparseMatrix g = (SparseMatrix(ops[i].adjoint()) * ops[j]).pruned();
                const double r = block_residual(g, dlow, dlow, i == j);
                if (i == j)
                    iso = std::max(iso, r);
                else
                    ortho = std::max(ortho, r);
            }
    };
    pair_scan(result.V);
    pair_scan(result.U);
    report.add("isometry", iso, "K[0.." + std::to_string(L - 1) + "]", tol.accept_eps);
    report.add("range-orthogonality", ortho, "K[0.." + std::to_string(L - 1) + "]",
               tol.accept_eps);

    // Exchange commutation V_i U_j = sum u[(i,j),(k,l)] U_l V_k on K[L-2].
    double comm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            SparseMatrix d = (result.V[i] * result.U[j]).pruned();
            for (Eigen::Index k = 0; k < n; ++k)
                for (Eigen::Index l = 0; l < m; ++l) {
                    const Complex coef = uflip(i * m + j, k * m + l);
                    if (coef != Complex(0.0, 0.0))
                        d = (d - SparseMatrix(coef * (result.U[l] * result.V[k]))).pruned();
                }
            double s = 0.0;
            for (Eigen::Index c = 0; c < dwin; ++c)
                for (SparseMatrix::InnerIterator it(d, c); it; ++it)
                    s += std::norm(it.value());
            comm = std::max(comm, std::sqrt(s));
        }
    report.add("commutation", comm, "K[0.." + std::to_string(L - 2) + "]", tol.accept_eps);

    // The complement of H maps into the complement of H.
    double inv = 0.0;
    for (const auto& ops : {std::cref(result.V), std::cref(result.U)})
        for (const auto& op : ops.get())
            inv = std::max(inv, band_residual(op, dh, dh, dlow - dh));
    report.add("complement-invariance", inv,
               "H vs K[0.." + std::to_string(L - 1) + "] minus H", tol.accept_eps);

    return report;
}

MinimalRestriction minimal_restriction(const DilationResult& result, const Tolerance& tol) {
    const Eigen::Index L = result.space.levels;
    const Eigen::Index total = result.space.total_dim;
    const Eigen::Index dh = result.space.d_h;
    const Matrix emb = embed_h(result.space);

    // Breadth-first word vectors: all shifts applied to H up to L-1 letters.
    std::vector<Matrix> layers;
    layers.push_back(emb);
    for (Eigen::Index step = 1; step <= L - 1; ++step) {
        const Matrix& prev = layers.back();
        Matrix next(total, (result.sys.n() + result.sys.m()) * prev.cols());
        Eigen::Index at = 0;
        for (const auto& op : result.V) {
            next.middleCols(at, prev.cols()) = op * prev;
            at += prev.cols();
        }
        for (const auto& op : result.U) {
            next.middleCols(at, prev.cols()) = op * prev;
            at += prev.cols();
        }
        layers.push_back(std::move(next));
    }
    Eigen::Index ncols = 0;
    for (const auto& l : layers) ncols += l.cols();
    Matrix kry(total, ncols);
    Eigen::Index at = 0;
    for (const auto& l : layers) {
        kry.middleCols(at, l.cols()) = l;
        at += l.cols();
    }

    // Orthonormal basis of the part outside H.
    Matrix kc = kry - emb * (emb.adjoint() * kry);
    Eigen::ColPivHouseholderQR<Matrix> qr(kc);
    const Matrix rmat = qr.matrixR();
    const double r00 = rmat.rows() > 0 && rmat.cols() > 0 ? std::abs(rmat(0, 0)) : 0.0;
    Eigen::Index rank = 0;
    const Eigen::Index rmax = std::min<Eigen::Index>(kc.rows(), kc.cols());
    while (rank < rmax && std::abs(rmat(rank, rank)) > tol.rank_eps * r00 &&
           std::abs(rmat(rank, rank)) > 0.0)
        ++rank;

    MinimalRestriction out;
    out.basis = Matrix(total, dh + rank);
    out.basis.leftCols(dh) = emb;
    if (rank > 0)
        out.basis.rightCols(rank) = qr.householderQ() * Matrix::Identity(total, rank);

    for (const auto& op : result.V)
        out.V.push_back(out.basis.adjoint() * (op * out.basis));
    for (const auto& op : result.U)
        out.U.push_back(out.basis.adjoint() * (op * out.basis));

    // Invariance: shifting any word vector of <= L-2 letters stays inside.
    Eigen::Index tcols = 0;
    for (Eigen::Index s = 0; s + 1 < static_cast<Eigen::Index>(layers.size()); ++s)
        tcols += layers[s].cols();
    Matrix test(total, tcols);
    at = 0;
    for (Eigen::Index s = 0; s + 1 < static_cast<Eigen::Index>(layers.size()); ++s) {
        test.middleCols(at, layers[s].cols()) = layers[s];
        at += layers[s].cols();
    }
    double invres = 0.0;
    for (const auto& ops : {std::cref(result.V), std::cref(result.U)})
        for (const auto& op : ops.get()) {
            Matrix y = op * test;
            y -= out.basis * (out.basis.adjoint() * y);
            invres = std::max(invres, y.norm());
        }
    out.invariance_residual = invres;

    // Corner words evaluated inside the restriction.
    const Eigen::Index cdepth = std::max<Eigen::Index>(1, L - 2);
    double corner = 0.0;
    std::function<void(const Matrix&, const Matrix&, Eigen::Index)> dfs =
        [&](const Matrix& state, const Matrix& expected, Eigen::Index remaining) {
            corner = std::max(corner, (state.topRows(dh).leftCols(dh) - expected).norm());
            if (remaining == 0) return;
            for (Eigen::Index i = 0; i < result.sys.n(); ++i)
                dfs(out.V[i] * state, result.rep.T[i] * expected, remaining - 1);
            for (Eigen::Index j = 0; j < result.sys.m(); ++j)
                dfs(out.U[j] * state, result.rep.S[j] * expected, remaining - 1);
        };
    Matrix root = Matrix::Zero(dh + rank, dh);
    root.topLeftCorner(dh, dh) = identity(dh);
    dfs(root, identity(dh), cdepth);
    out.corner_residual = corner;
    return out;
}

json sparse_to_json(const SparseMatrix& a) {
    json trips = json::array();
    for (Eigen::Index c = 0; c < a.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(a, c); it; ++it)
            trips.push_back({it.row(), it.col(), it.value().real(), it.value().imag()});
    return json{{"rows", a.rows()}, {"cols", a.cols()}, {"triplets", std::move(trips)}};
}

SparseMatrix sparse_from_json(const json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
        !j.contains("triplets") || !j.at("triplets").is_array())
        throw Error(ErrorCode::parse_error, "sparse matrix JSON needs rows, cols, triplets");
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    if (rows < 0 || cols < 0)
        throw Error(ErrorCode::parse_error, "sparse matrix dimensions must be nonnegative");
    std::vector<Triplet> trips;
    for (const auto& t : j.at("triplets")) {
        if (!t.is_array() || t.size() != 4)
            throw Error(ErrorCode::parse_error, "sparse triplet must be [row, col, re, im]");
        const Eigen::Index r = t[0].get<Eigen::Index>();
        const Eigen::Index c = t[1].get<Eigen::Index>();
        if (r < 0 || r >= rows || c < 0 || c >= cols)
            throw Error(ErrorCode::parse_error, "sparse triplet outside the matrix");
        trips.emplace_back(r, c, Complex(t[2].get<double>(), t[3].get<double>()));
    }
    SparseMatrix out(rows, cols);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

json dilation_to_json(const DilationResult& result, bool include_operators) {
    json residuals = json::array();
    for (double r : result.corrector.residual_level) residuals.push_back(r);
    json out{{"system", system_to_json(result.sys)},
             {"rep", rep_to_json(result.rep)},
             {"space", space_to_json(result.space)},
             {"valid_depth", result.valid_depth},
             {"residual_level", std::move(residuals)}};
    if (include_operators) {
        json corr = json::array();
        for (const auto& blk : result.corrector.blocks) corr.push_back(matrix_to_json(blk));
        json v = json::array(), u = json::array();
        for (const auto& op : result.V) v.push_back(sparse_to_json(op));
        for (const auto& op : result.U) u.push_back(sparse_to_json(op));
        out["corrector"] = std::move(corr);
        out["V"] = std::move(v);
        out["U"] = std::move(u);
    }
    return out;
}

DilationResult dilation_from_json(const json& j, const Tolerance& tol) {
    if (!j.is_object() || !j.contains("system") || !j.contains("rep") || !j.contains("space"))
        throw Error(ErrorCode::parse_error, "dilation JSON needs system, rep, space");
    const ScalarProductSystem sys = system_from_json(j.at("system"));
    const CovariantRep rep = rep_from_json(j.at("rep"));
    const json& sp = j.at("space");
    if (!sp.contains("L") || !sp.contains("mu") || !sp.contains("total_dim"))
        throw Error(ErrorCode::parse_error, "space JSON needs L, mu, total_dim");
    const Eigen::Index levels = sp.at("L").get<Eigen::Index>();
    const Eigen::Index mu = sp.at("mu").get<Eigen::Index>();

    if (!j.contains("V") || !j.contains("U") || !j.contains("corrector"))
        return assemble_dilation(sys, rep, levels, mu, tol);

    DilationResult result;
    result.sys = sys;
    result.rep = rep;
    result.space = build_graded_space(sys, rep.h, levels, mu);
    if (result.space.total_dim != sp.at("total_dim").get<Eigen::Index>())
        throw Error(ErrorCode::parse_error, "space metadata does not match its parameters");
    result.prim = build_primitive_isometries(sys, rep, result.space, tol);
    result.corrector.blocks.clear();
    for (const auto& blk : j.at("corrector"))
        result.corrector.blocks.push_back(matrix_from_json(blk));
    if (static_cast<Eigen::Index>(result.corrector.blocks.size()) != levels + 1)
        throw Error(ErrorCode::parse_error, "corrector chain has the wrong length");
    result.corrector.residual_level.assign(levels + 1, 0.0);
    if (j.contains("residual_level")) {
        result.corrector.residual_level.clear();
        for (const auto& r : j.at("residual_level"))
            result.corrector.residual_level.push_back(r.get<double>());
    }
    for (const auto& op : j.at("V")) result.V.push_back(sparse_from_json(op));
    for (const auto& op : j.at("U")) result.U.push_back(sparse_from_json(op));
    if (static_cast<Eigen::Index>(result.V.size()) != sys.n() ||
        static_cast<Eigen::Index>(result.U.size()) != sys.m())
        throw Error(ErrorCode::parse_error, "operator counts do not match the system");
    for (const auto& op : result.V)
        if (op.rows() != result.space.total_dim || op.cols() != result.space.total_dim)
            throw Error(ErrorCode::parse_error, "operator size does not match the space");
    for (const auto& op : result.U)
        if (op.rows() != result.space.total_dim || op.cols() != result.space.total_dim)
            throw Error(ErrorCode::parse_error, "operator size does not match the space");
    result.valid_depth = levels - 1;
    return result;
}

}  // namespace cpdil
