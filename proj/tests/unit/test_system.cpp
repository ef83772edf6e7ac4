#include <array>
#include <random>

#include "catalogue.hpp"
#include "cpdil/product_system.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cpdil;
using helpers::dist;

namespace {

ScalarProductSystem pauli_system() {
    const auto pair = catalogue::pair_by_name("bitflip(0.50)-phaseflip(0.50)");
    return make_system(build_flip_unitary(pair.theta, pair.phi));
}

}  // namespace

TEST_CASE("make_system rejects a non-unitary exchange matrix") {
    FlipUnitary u;
    u.n = 1;
    u.m = 1;
    u.u = Matrix::Constant(1, 1, 0.5);
    try {
        make_system(u);
        FAIL("expected a unitarity rejection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_flip);
    }
}

TEST_CASE("scalar system with trivial exchange") {
    FlipUnitary u;
    u.n = 1;
    u.m = 1;
    u.u = Matrix::Constant(1, 1, 1.0);
    const ScalarProductSystem sys = make_system(u);
    for (Eigen::Index a = 0; a <= 4; ++a)
        for (Eigen::Index b = 0; b <= 4; ++b) {
            const Matrix t = sys.flip_mn(a, b);
            REQUIRE(t.rows() == 1);
            CHECK(std::abs(t(0, 0) - Complex(1.0, 0.0)) <= 1e-12);
        }
}

TEST_CASE("scalar system with a root-of-unity exchange phase") {
    const auto pair = catalogue::pair_by_name("clock-shift-d3");
    const ScalarProductSystem sys =
        make_system(build_flip_unitary(pair.theta, pair.phi));
    const Complex w = catalogue::omega3();
    // One letter pair exchanges to the phase, words multiply it up.
    for (Eigen::Index a = 0; a <= 3; ++a)
        for (Eigen::Index b = 0; b <= 3; ++b) {
            Complex expect(1.0, 0.0);
            for (Eigen::Index k = 0; k < a * b; ++k) expect *= w;
            CHECK(std::abs(sys.flip_mn(a, b)(0, 0) - expect) <= 1e-12);
        }
}

TEST_CASE("composed exchanges are unitary and satisfy the splitting law") {
    const ScalarProductSystem sys = pauli_system();
    for (Eigen::Index a = 0; a <= 4; ++a)
        for (Eigen::Index b = 0; b <= 4; ++b) {
            const Matrix t = sys.flip_mn(a, b);
            CHECK(dist(t.adjoint() * t, Matrix::Identity(t.cols(), t.cols())) <= 1e-10);
            if (a == 0 || b == 0)
                CHECK(dist(t, Matrix::Identity(t.rows(), t.cols())) == 0.0);
        }

    const Eigen::Index n = sys.n();
    for (auto [a, b, np] : {std::array<Eigen::Index, 3>{1, 1, 1},
                            std::array<Eigen::Index, 3>{1, 2, 2},
                            std::array<Eigen::Index, 3>{2, 1, 2},
                            std::array<Eigen::Index, 3>{2, 2, 1}}) {
        const Matrix lhs = sys.flip_mn(a + b, np);
        const Eigen::Index ea = 1 << a, eb = 1 << b;  // n = 2 here
        REQUIRE(n == 2);
        const Matrix rhs = kron(sys.flip_mn(a, np), Matrix::Identity(eb, eb)) *
                           kron(Matrix::Identity(ea, ea), sys.flip_mn(b, np));
        CHECK(dist(lhs, rhs) <= 1e-10);
    }
}

TEST_CASE("validate_rep enforces shapes and contractivity") {
    const ScalarProductSystem sys = pauli_system();
    CovariantRep rep;
    rep.h = 2;
    rep.T = {catalogue::eye(2)};
    rep.S = {0.5 * catalogue::eye(2), 0.5 * catalogue::eye(2)};
    CHECK_THROWS_AS(validate_rep(sys, rep), Error);  // wrong T count

    rep.T = {catalogue::eye(2), catalogue::eye(2)};  // row norm sqrt(2)
    try {
        validate_rep(sys, rep);
        FAIL("expected a contractivity rejection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_input);
    }

    const auto pair = catalogue::pair_by_name("bitflip(0.50)-phaseflip(0.50)");
    CHECK_NOTHROW(validate_rep(sys, catalogue::identity_rep(pair)));
}

TEST_CASE("block rows enumerate words with the leftmost letter most significant") {
    std::mt19937_64 rng(7301);
    CovariantRep rep;
    rep.h = 3;
    rep.T = {helpers::random_contraction(3, rng), helpers::random_contraction(3, rng)};
    rep.S = {helpers::random_contraction(3, rng)};

    const Matrix row = row_matrix(rep, Side::T, 2);
    REQUIRE(row.cols() == 4 * 3);
    for (Eigen::Index w1 = 0; w1 < 2; ++w1)
        for (Eigen::Index w2 = 0; w2 < 2; ++w2)
            CHECK(dist(row.middleCols((w1 * 2 + w2) * 3, 3),
                       rep.T[w1] * rep.T[w2]) <= 1e-14);
    CHECK(dist(row_matrix(rep, Side::T, 0), Matrix::Identity(3, 3)) == 0.0);
}

TEST_CASE("block rows of a valid tuple stay contractive at every length") {
    const auto pair = catalogue::pair_by_name("bitflip(0.50)-phaseflip(0.50)");
    const CovariantRep rep = catalogue::identity_rep(pair);
    for (Eigen::Index k = 0; k <= 3; ++k) {
        CHECK(operator_norm(row_matrix(rep, Side::T, k)) <= 1.0 + 1e-10);
        CHECK(operator_norm(row_matrix(rep, Side::S, k)) <= 1.0 + 1e-10);
    }
}

TEST_CASE("one-letter exchange residual propagates to longer words") {
    const ScalarProductSystem sys = pauli_system();
    const auto pair = catalogue::pair_by_name("bitflip(0.50)-phaseflip(0.50)");
    const CovariantRep rep = catalogue::identity_rep(pair);
    REQUIRE(commutation_residual(sys, rep, 1, 1) <= 1e-10);
    for (Eigen::Index mp = 1; mp <= 3; ++mp)
        for (Eigen::Index np = 1; np <= 3; ++np)
            CHECK(commutation_residual(sys, rep, mp, np) <= 1e-8);
}

TEST_CASE("a mismatched exchange matrix is detected by the residual") {
    FlipUnitary wrong;
    wrong.n = 2;
    wrong.m = 2;
    wrong.u = Matrix::Identity(4, 4);  // the true exchange needs the sign flip
    const ScalarProductSystem sys = make_system(wrong);
    const auto pair = catalogue::pair_by_name("bitflip(0.50)-phaseflip(0.50)");
    CHECK(commutation_residual(sys, catalogue::identity_rep(pair), 1, 1) > 0.01);
}

TEST_CASE("the induced channel pair recovers the represented channels") {
    const auto pair = catalogue::pair_by_name("bitflip(0.50)-phaseflip(0.50)");
    const auto [theta, phi] = induced_cp_pair(catalogue::identity_rep(pair));
    CHECK(dist(choi_matrix(theta), choi_matrix(pair.theta)) <= 1e-12);
    CHECK(dist(choi_matrix(phi), choi_matrix(pair.phi)) <= 1e-12);
}

TEST_CASE("system and representation JSON round trips") {
    const ScalarProductSystem sys = pauli_system();
    const ScalarProductSystem back = system_from_json(system_to_json(sys));
    CHECK(back.n() == 2);
    CHECK(back.m() == 2);
    CHECK(dist(back.unitary().u, sys.unitary().u) == 0.0);

    const auto pair = catalogue::pair_by_name("bitflip(0.50)-phaseflip(0.50)");
    const CovariantRep rep = catalogue::identity_rep(pair);
    const CovariantRep rep_back = rep_from_json(rep_to_json(rep));
    CHECK(rep_back.h == 2);
    REQUIRE(rep_back.T.size() == 2);
    CHECK(dist(rep_back.T[1], rep.T[1]) == 0.0);
    CHECK(dist(rep_back.S[1], rep.S[1]) == 0.0);

    CHECK_THROWS_AS(system_from_json(json{{"n", 1}}), Error);
    CHECK_THROWS_AS(rep_from_json(json{{"h", 1}}), Error);
}
