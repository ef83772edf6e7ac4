#include "catalogue.hpp"
#include "cpdil/endo.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cpdil;
using helpers::dist;

namespace {

ScalarProductSystem system_of(const catalogue::Pair& pair) {
    return make_system(build_flip_unitary(pair.theta, pair.phi));
}

ScalarProductSystem scalar_system() {
    FlipUnitary u;
    u.n = 1;
    u.m = 1;
    u.u = Matrix::Constant(1, 1, 1.0);
    return make_system(u);
}

CovariantRep scalar_rep(double t, double s) {
    CovariantRep rep;
    rep.h = 1;
    rep.T = {Matrix::Constant(1, 1, t)};
    rep.S = {Matrix::Constant(1, 1, s)};
    return rep;
}

}  // namespace

TEST_CASE("scalar corner recovery is exact") {
    const EndoPair lifted =
        lift_endomorphisms(assemble_dilation(scalar_system(), scalar_rep(0.5, 1.0 / 3.0), 4));
    const Matrix emb = embed_h(lifted.result.space);
    const Matrix unit = emb * emb.adjoint();  // the embedded 1 x 1 corner
    const Matrix back = emb.adjoint() * lifted.alpha(unit) * emb;
    CHECK(std::abs(back(0, 0) - Complex(0.25, 0.0)) <= 1e-12);
    const Matrix back_b = emb.adjoint() * lifted.beta(unit) * emb;
    CHECK(std::abs(back_b(0, 0) - Complex(1.0 / 9.0, 0.0)) <= 1e-12);
}

TEST_CASE("zero shifts lift to the projection onto first-letter grades") {
    const DilationResult res = assemble_dilation(scalar_system(), scalar_rep(0.0, 0.0), 3);
    const EndoPair lifted = lift_endomorphisms(res);
    const Eigen::Index window = res.space.dim_upto(1);
    const Matrix total = Matrix::Identity(res.space.total_dim, res.space.total_dim);
    const Matrix proj = lifted.alpha(total).topLeftCorner(window, window);

    Matrix expect = Matrix::Zero(window, window);
    const GradeBlock& blk10 = res.space.block(1, 0);
    const GradeBlock& blk11 = res.space.block(1, 1);
    expect(blk10.offset, blk10.offset) = 1.0;
    expect(blk11.offset, blk11.offset) = 1.0;
    CHECK(dist(proj, expect) <= 1e-12);
}

TEST_CASE("both lifts verify against the represented channels") {
    const auto pair = catalogue::pair_by_name("bitflip(0.50)-phaseflip(0.50)");
    const DilationResult res =
        assemble_dilation(system_of(pair), catalogue::identity_rep(pair), 3);
    EndoOptions opts;
    opts.depth = 1;
    opts.samples = 30;
    const Report report =
        verify_endomorphic_dilation(lift_endomorphisms(res), pair.theta, pair.phi, opts);
    CHECK(report.pass);
    CHECK(report.residual_of("corner-recovery-alpha") <= 1e-10);
    CHECK(report.residual_of("corner-recovery-beta") <= 1e-10);
    CHECK(report.residual_of("coinvariance-alpha") <= 1e-8);
    CHECK(report.residual_of("multiplicativity-alpha") <= 1e-8);
    CHECK(report.residual_of("multiplicativity-beta") <= 1e-8);
    CHECK(report.residual_of("endo-commutation") <= 1e-8);
}

TEST_CASE("verification rejects mismatched channels and bad windows") {
    const auto pair = catalogue::pair_by_name("bitflip(0.50)-phaseflip(0.50)");
    const DilationResult res =
        assemble_dilation(system_of(pair), catalogue::identity_rep(pair), 3);
    const EndoPair lifted = lift_endomorphisms(res);

    EndoOptions opts;
    opts.depth = 5;  // beyond L - 2
    CHECK_THROWS_AS(verify_endomorphic_dilation(lifted, pair.theta, pair.phi, opts), Error);

    EndoOptions ok;
    ok.depth = 1;
    ok.samples = 5;
    const Report report = verify_endomorphic_dilation(
        lifted, pair.theta, catalogue::phase_flip(0.25), ok);  // wrong phi
    CHECK_FALSE(report.pass);
    CHECK(report.residual_of("corner-recovery-beta") > 1e-3);
}

TEST_CASE("seeded verification is repeatable") {
    const auto pair = catalogue::pair_by_name("bitflip(0.50)-phaseflip(0.50)");
    const DilationResult res =
        assemble_dilation(system_of(pair), catalogue::identity_rep(pair), 3);
    const EndoPair lifted = lift_endomorphisms(res);
    EndoOptions opts;
    opts.depth = 1;
    opts.samples = 10;
    const Report a = verify_endomorphic_dilation(lifted, pair.theta, pair.phi, opts);
    const Report b = verify_endomorphic_dilation(lifted, pair.theta, pair.phi, opts);
    REQUIRE(a.identities.size() == b.identities.size());
    for (size_t i = 0; i < a.identities.size(); ++i)
        CHECK(a.identities[i].max_residual == b.identities[i].max_residual);
}

TEST_CASE("round trip recovers the two-letter system") {
    const auto pair = catalogue::pair_by_name("bitflip(0.50)-phaseflip(0.50)");
    const ScalarProductSystem sys = system_of(pair);
    const RoundtripReport report =
        roundtrip_metric_spaces(sys, catalogue::identity_rep(pair));
    CHECK(report.pass);
    CHECK(report.n == 2);
    CHECK(report.m == 2);
    CHECK(report.reduced_n == 2);
    CHECK(report.reduced_m == 2);
    CHECK_FALSE(report.index_drop_t);
    CHECK_FALSE(report.index_drop_s);
    CHECK(report.dim_e_theta == 2);
    CHECK(report.dim_e_phi == 2);
    CHECK(report.relation_residual <= 1e-8);
    CHECK(report.flip_distance >= 0.0);
    CHECK(report.flip_distance <= 1e-8);
}

TEST_CASE("round trip of the scalar pair") {
    const auto pair = catalogue::pair_by_name("scalar-half-third");
    const RoundtripReport report =
        roundtrip_metric_spaces(system_of(pair), catalogue::identity_rep(pair));
    CHECK(report.pass);
    CHECK(report.dim_e_theta == 1);
    CHECK(report.dim_e_phi == 1);
    CHECK(report.relation_residual <= 1e-12);
}

TEST_CASE("round trip reports the dropped redundant operator") {
    const auto degen = catalogue::degenerate_rep();
    const RoundtripReport report = roundtrip_metric_spaces(degen.rep);
    CHECK(report.pass);
    CHECK(report.m == 2);
    CHECK(report.reduced_m == 1);
    CHECK(report.index_drop_s);
    CHECK_FALSE(report.index_drop_t);
    CHECK(report.dim_e_phi == 1);
    CHECK(report.relation_residual <= 1e-8);
    CHECK(report.flip_distance == -1.0);

    const json j = roundtrip_to_json(report);
    CHECK(j.at("index_drop_s").get<bool>());
    CHECK(j.at("reduced_m").get<Eigen::Index>() == 1);
    CHECK(j.at("verdict").get<std::string>() == "pass");
}
