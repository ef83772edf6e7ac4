// Discrete two-parameter product systems with one exchange unitary, together
// with covariant representation tuples and their commutation residuals.
#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "cpdil/flip.hpp"

namespace cpdil {

// Fibers E = C^n and F = C^m with the exchange t = t_{1,1} derived from u.
// Composed flips t_{m,n} are memoized behind a shared cache.
class ScalarProductSystem {
  public:
    ScalarProductSystem() = default;

    Eigen::Index n() const { return u_.n; }
    Eigen::Index m() const { return u_.m; }
    const FlipUnitary& unitary() const { return u_; }
    const Matrix& t11() const { return t11_; }

    // t_{m,n} : E^m (x) F^n -> F^n (x) E^m, identity when either power is 0.
    Matrix flip_mn(Eigen::Index m_pow, Eigen::Index n_pow) const;

    friend ScalarProductSystem make_system(const FlipUnitary& u, const Tolerance& tol);

  private:
    FlipUnitary u_;
    Matrix t11_;
    struct Cache {
        std::mutex mutex;
        std::map<std::pair<Eigen::Index, Eigen::Index>, Matrix> flips;
    };
    std::shared_ptr<Cache> cache_;
};

// Validates unitarity of u (InvalidFlip otherwise).
ScalarProductSystem make_system(const FlipUnitary& u, const Tolerance& tol = {});

// Representation tuple on C^h: T_i for the e_i directions, S_j for f_j.
struct CovariantRep {
    Eigen::Index h = 0;
    std::vector<Matrix> T;
    std::vector<Matrix> S;
};

// Dimension checks plus row contractivity of both tuples.
void validate_rep(const ScalarProductSystem& sys, const CovariantRep& rep,
                  const Tolerance& tol = {});

enum class Side { T, S };

// Block row of all length-k operator words, blocks in word-lexicographic order
// with the leftmost letter most significant; k = 0 gives the identity.
Matrix row_matrix(const CovariantRep& rep, Side side, Eigen::Index k);

// Frobenius norm of T~_m (I (x) S~_n) - S~_n (I (x) T~_m) (t_{m,n} (x) I_H).
double commutation_residual(const ScalarProductSystem& sys, const CovariantRep& rep,
                            Eigen::Index m_pow, Eigen::Index n_pow);

// CP maps induced by the tuple: theta = sum_i T_i . T_i^*, phi likewise for S.
std::pair<KrausFamily, KrausFamily> induced_cp_pair(const CovariantRep& rep);

// JSON schemas {"n", "m", "u": matrix} and {"h", "T": [...], "S": [...]}
// (representations optionally carry "u").
json system_to_json(const ScalarProductSystem& sys);
ScalarProductSystem system_from_json(const json& j);
json rep_to_json(const CovariantRep& rep);
CovariantRep rep_from_json(const json& j);

}  // namespace cpdil
