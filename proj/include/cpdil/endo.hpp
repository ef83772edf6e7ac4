#pragma once

#include <cstdint>

#include "cpdil/dilation.hpp"
#include "cpdil/kraus.hpp"
#include "cpdil/report.hpp"

namespace cpdil {

// The dilated isometric tuples induce a commuting pair of unital-on-the-range
// *-endomorphism candidates on the truncated matrix algebra:
//   alpha(b) = sum_i V_i b V_i*,   beta(b) = sum_j U_j b U_j*.
struct EndoPair {
    DilationResult result;
    Eigen::Index valid_depth = 0;

    Matrix alpha(const Matrix& b) const;
    Matrix beta(const Matrix& b) const;
};

EndoPair lift_endomorphisms(DilationResult result);

struct EndoOptions {
    Eigen::Index depth = 2;                 // grade window for sampled operators
    Eigen::Index samples = 100;             // multiplicativity draws per map
    Eigen::Index commutation_samples = 12;  // alpha/beta exchange draws
    std::uint64_t seed = 20260823;
};

// Checks that (alpha, beta) dilates the CP pair (theta, phi): corner recovery
// on matrix units, coinvariance of the embedded corner, multiplicativity on
// random operators supported on grades <= depth, and alpha beta = beta alpha
// on the same window.
Report verify_endomorphic_dilation(const EndoPair& pair, const KrausFamily& theta,
                                   const KrausFamily& phi, const EndoOptions& opts,
                                   const Tolerance& tol = {});

struct RoundtripReport {
    Eigen::Index n = 0;                // tuple sizes as given
    Eigen::Index m = 0;
    Eigen::Index reduced_n = 0;        // after dropping dependent operators
    Eigen::Index reduced_m = 0;
    bool index_drop_t = false;         // T family was linearly dependent
    bool index_drop_s = false;
    Eigen::Index dim_e_theta = 0;      // intertwiner-space dimensions of the
    Eigen::Index dim_e_phi = 0;        // induced CP pair
    double relation_residual = 0.0;    // rebuilt exchange relation on the ops
    double flip_distance = -1.0;       // ||u - u'||_F when comparable, else -1
    bool pass = false;
};

// Round trip: rep -> induced CP pair -> intertwiner spaces -> rebuilt exchange
// unitary.  Asserts the index equalities dim E = reduced operator count and
// that the rebuilt unitary satisfies the exchange relation on the operators.
RoundtripReport roundtrip_metric_spaces(const CovariantRep& rep, const Tolerance& tol = {});

// Same, but also reports the distance between the system's unitary and the
// rebuilt one (meaningful only when no operators were dropped).
RoundtripReport roundtrip_metric_spaces(const ScalarProductSystem& sys,
                                        const CovariantRep& rep, const Tolerance& tol = {});

json roundtrip_to_json(const RoundtripReport& report);

}  // namespace cpdil
