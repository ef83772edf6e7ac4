#include "catalogue.hpp"
#include "cpdil/gram.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cpdil;
using helpers::dist;

TEST_CASE("tensor-space Gram matrices are Hermitian positive semidefinite") {
    const auto pair = catalogue::pair_by_name("bitflip(0.50)-phaseflip(0.50)");
    for (auto order : {TensorOrder::phi_theta, TensorOrder::theta_phi}) {
        const GramSpace gs = gram_tensor_space(pair.theta, pair.phi, order);
        CHECK(gs.gram.rows() == 32);  // d^5
        CHECK(is_hermitian(gs.gram, 1e-10));
        Eigen::SelfAdjointEigenSolver<Matrix> es(gs.gram);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        CHECK(gs.rank > 0);
        CHECK(gs.rank <= 32);
    }
}

TEST_CASE("tensor-space generators are capped at d = 3") {
    const KrausFamily big{4, {catalogue::eye(4)}};
    try {
        gram_tensor_space(big, big, TensorOrder::phi_theta);
        FAIL("expected a size rejection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::too_large);
    }
}

TEST_CASE("direct tensor oracle accepts the bit-flip/phase-flip pair") {
    const auto pair = catalogue::pair_by_name("bitflip(0.50)-phaseflip(0.50)");
    const StrongCommuteReport report = strong_commute_direct(pair.theta, pair.phi);
    CHECK(report.verdict);
    CHECK(report.isometry_residual <= 1e-8);
    CHECK(report.complement_phi_theta == report.complement_theta_phi);
}

TEST_CASE("both strong-commutation oracles agree on the commuting corpus") {
    for (const auto& pair : catalogue::commuting_pairs()) {
        CAPTURE(pair.name);
        const bool kernel_verdict =
            strong_commute_kernel_test(pair.theta, pair.phi).verdict;
        const StrongCommuteReport direct = strong_commute_direct(pair.theta, pair.phi);
        CHECK(direct.verdict == kernel_verdict);
    }
}

TEST_CASE("intertwiner space of the bit-flip channel") {
    const KrausFamily bf = catalogue::bit_flip(0.5);
    const IntertwinerSpace space = intertwiner_space(bf);
    REQUIRE(space.basis.size() == 2);  // the reduced Kraus count
    CHECK(space.space_dim == 4);      // realized inside C^d (x) C^r

    for (const auto& x : space.basis)
        CHECK(dist(x.adjoint() * x, Matrix::Identity(2, 2)) <= 1e-10);

    // The recovered family presents the same channel.
    KrausFamily rebuilt{2, space.rep};
    CHECK(dist(choi_matrix(rebuilt), choi_matrix(bf)) <= 1e-10);
}

TEST_CASE("intertwiner space of a conjugation is one-dimensional") {
    const IntertwinerSpace space = intertwiner_space(catalogue::conjugation(catalogue::clock3()));
    CHECK(space.basis.size() == 1);
    KrausFamily rebuilt{3, space.rep};
    CHECK(dist(choi_matrix(rebuilt),
               choi_matrix(catalogue::conjugation(catalogue::clock3()))) <= 1e-10);
}

TEST_CASE("intertwiner realization is capped at d = 5") {
    const KrausFamily big{6, {catalogue::eye(6)}};
    try {
        intertwiner_space(big);
        FAIL("expected a size rejection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::too_large);
    }
}
