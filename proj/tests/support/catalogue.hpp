// Shared test corpus: the channel pairs and representation tuples exercised
// by the unit, acceptance and CLI suites, built exactly (no file round trip).
#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "cpdil/flip.hpp"
#include "cpdil/kraus.hpp"
#include "cpdil/product_system.hpp"

namespace catalogue {

using cpdil::Complex;
using cpdil::CovariantRep;
using cpdil::KrausFamily;
using cpdil::Matrix;

inline Matrix eye(Eigen::Index d) { return Matrix::Identity(d, d); }

inline Matrix pauli_x() {
    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    return x;
}

inline Matrix pauli_z() {
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    return z;
}

inline Matrix hadamard() {
    Matrix h(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    h << s, s, s, -s;
    return h;
}

// Diagonal cube-root-of-unity phase matrix and the cyclic shift on C^3;
// they satisfy clock * shift = omega * shift * clock.
inline Complex omega3() { return std::polar(1.0, 2.0 * M_PI / 3.0); }

inline Matrix clock3() {
    Matrix c = Matrix::Zero(3, 3);
    c(0, 0) = 1.0;
    c(1, 1) = omega3();
    c(2, 2) = omega3() * omega3();
    return c;
}

inline Matrix shift3() {
    Matrix s = Matrix::Zero(3, 3);
    s(1, 0) = 1.0;
    s(2, 1) = 1.0;
    s(0, 2) = 1.0;
    return s;
}

// a -> (1-p) a + p X a X.
inline KrausFamily bit_flip(double p) {
    return KrausFamily{2, {std::sqrt(1.0 - p) * eye(2), std::sqrt(p) * pauli_x()}};
}

// a -> (1-q) a + q Z a Z.
inline KrausFamily phase_flip(double q) {
    return KrausFamily{2, {std::sqrt(1.0 - q) * eye(2), std::sqrt(q) * pauli_z()}};
}

inline KrausFamily conjugation(const Matrix& u) {
    return KrausFamily{u.rows(), {u}};
}

inline KrausFamily scalar(double t) {
    return KrausFamily{1, {Matrix::Constant(1, 1, t)}};
}

struct Pair {
    std::string name;
    KrausFamily theta;
    KrausFamily phi;
    bool commuting = true;
    // Exchange unitary pinned by the construction convention; empty when the
    // value is checked only through the relation residual.
    Matrix expected_u;
};

inline std::vector<Pair> all_pairs() {
    std::vector<Pair> out;
    const double s = 1.0 / std::sqrt(2.0);

    out.push_back({"identity-d2", KrausFamily{2, {eye(2)}}, KrausFamily{2, {eye(2)}},
                   true, Matrix::Constant(1, 1, 1.0)});
    out.push_back({"scalar-half-third", scalar(0.5), scalar(1.0 / 3.0), true,
                   Matrix::Constant(1, 1, 1.0)});

    for (double p : {0.25, 0.5})
        for (double q : {0.25, 0.5}) {
            Pair pr;
            pr.name = "bitflip(" + std::to_string(p).substr(0, 4) + ")-phaseflip(" +
                      std::to_string(q).substr(0, 4) + ")";
            pr.theta = bit_flip(p);
            pr.phi = phase_flip(q);
            if (p == 0.5 && q == 0.5) {
                pr.expected_u = Matrix::Identity(4, 4);
                pr.expected_u(3, 3) = -1.0;
            }
            out.push_back(std::move(pr));
        }

    {
        Pair pr;
        pr.name = "clock-shift-d3";
        pr.theta = conjugation(clock3());
        pr.phi = conjugation(shift3());
        pr.expected_u = Matrix::Constant(1, 1, omega3());
        out.push_back(std::move(pr));
    }
    {
        Pair pr;
        pr.name = "clock-shift-mix-d3";
        pr.theta = KrausFamily{3, {s * eye(3), s * clock3()}};
        pr.phi = KrausFamily{3, {s * eye(3), s * shift3()}};
        out.push_back(std::move(pr));
    }
    {
        // Same channel on both sides with a two-dimensional product kernel:
        // the exchange unitary needs the deterministic kernel extension.
        Pair pr;
        pr.name = "bitflip-twice";
        pr.theta = KrausFamily{2, {s * eye(2), s * pauli_x()}};
        pr.phi = pr.theta;
        out.push_back(std::move(pr));
    }
    {
        Pair pr;
        pr.name = "conjugation-x-vs-h";
        pr.theta = conjugation(pauli_x());
        pr.phi = conjugation(hadamard());
        pr.commuting = false;
        out.push_back(std::move(pr));
    }
    return out;
}

inline std::vector<Pair> commuting_pairs() {
    std::vector<Pair> out;
    for (auto& p : all_pairs())
        if (p.commuting) out.push_back(std::move(p));
    return out;
}

inline Pair pair_by_name(const std::string& name) {
    for (auto& p : all_pairs())
        if (p.name == name) return p;
    throw std::runtime_error("unknown catalogue pair: " + name);
}

// Every distinct single channel appearing in the corpus, with the rank of its
// canonical reduced presentation.
struct Channel {
    std::string name;
    KrausFamily map;
    Eigen::Index reduced_size = 0;
};

inline std::vector<Channel> channels() {
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<Channel> out;
    out.push_back({"identity-d2", KrausFamily{2, {eye(2)}}, 1});
    out.push_back({"scalar-half", scalar(0.5), 1});
    out.push_back({"scalar-third", scalar(1.0 / 3.0), 1});
    out.push_back({"bitflip(0.25)", bit_flip(0.25), 2});
    out.push_back({"bitflip(0.5)", bit_flip(0.5), 2});
    out.push_back({"phaseflip(0.25)", phase_flip(0.25), 2});
    out.push_back({"phaseflip(0.5)", phase_flip(0.5), 2});
    out.push_back({"conj-clock", conjugation(clock3()), 1});
    out.push_back({"conj-shift", conjugation(shift3()), 1});
    out.push_back({"mix-clock", KrausFamily{3, {s * eye(3), s * clock3()}}, 2});
    out.push_back({"mix-shift", KrausFamily{3, {s * eye(3), s * shift3()}}, 2});
    out.push_back({"bitflip-redundant",
                   KrausFamily{2, {0.5 * eye(2), 0.5 * pauli_x(), 0.5 * pauli_x(),
                                   0.5 * eye(2)}},
                   2});
    out.push_back({"conj-x", conjugation(pauli_x()), 1});
    out.push_back({"conj-h", conjugation(hadamard()), 1});
    return out;
}

// The tuple that represents a commuting pair on its own space: T_i and S_j
// are the Kraus operators themselves.
inline CovariantRep identity_rep(const Pair& pair) {
    CovariantRep rep;
    rep.h = pair.theta.d;
    rep.T = pair.theta.ops;
    rep.S = pair.phi.ops;
    return rep;
}

// Tuple with a linearly dependent S family (both entries equal): the induced
// second channel has rank one, so the reduction must drop an operator.
struct DegenerateRep {
    cpdil::FlipUnitary u;
    CovariantRep rep;
};

inline DegenerateRep degenerate_rep() {
    DegenerateRep out;
    out.u.n = 2;
    out.u.m = 2;
    out.u.u = Matrix::Identity(4, 4);
    out.rep.h = 2;
    const double s = 1.0 / std::sqrt(2.0);
    out.rep.T = {s * eye(2), s * pauli_x()};
    out.rep.S = {0.5 * pauli_z(), 0.5 * pauli_z()};
    return out;
}

}  // namespace catalogue
