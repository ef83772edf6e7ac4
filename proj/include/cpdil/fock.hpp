// Truncated doubly graded Fock space over a two-parameter product system:
// grades (a, b) with max(a, b) <= L, level-major basis enumeration.
#pragma once

#include "cpdil/product_system.hpp"

namespace cpdil {

inline constexpr Eigen::Index kDefaultDimCap = 32768;

// One grade block E^a (x) F^b (x) H_level with contiguous basis indices
// offset .. offset + n^a * m^b * h_dim. Within a block the index is
// (e_word * m^b + f_word) * h_dim + h, words ranked lexicographically with the
// leftmost letter most significant.
struct GradeBlock {
    Eigen::Index a = 0;
    Eigen::Index b = 0;
    Eigen::Index offset = 0;
    Eigen::Index e_dim = 0;  // n^a
    Eigen::Index f_dim = 0;  // m^b
    Eigen::Index h_dim = 0;  // dim H_max(a,b)
    Eigen::Index size() const { return e_dim * f_dim * h_dim; }
};

struct GradedFockSpace {
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    Eigen::Index d_h = 0;
    Eigen::Index levels = 0;  // L
    Eigen::Index mu = 0;      // padding multiplicity, dim H_k = d_h * (1 + mu)^k
    std::vector<Eigen::Index> h_dims;        // per level 0..L
    std::vector<GradeBlock> blocks;          // level-major, (a, b) lex within a level
    std::vector<Eigen::Index> level_offset;  // start of each level, plus total at the end
    Eigen::Index total_dim = 0;

    Eigen::Index block_index(Eigen::Index a, Eigen::Index b) const;
    const GradeBlock& block(Eigen::Index a, Eigen::Index b) const {
        return blocks[block_index(a, b)];
    }
    // dim K[k], the sum of all levels <= k.
    Eigen::Index dim_upto(Eigen::Index k) const { return level_offset[k + 1]; }
    Eigen::Index level_dim(Eigen::Index k) const {
        return level_offset[k + 1] - level_offset[k];
    }
};

// Enumerates all grades with max(a, b) <= levels; throws TooLarge past cap.
GradedFockSpace build_graded_space(const ScalarProductSystem& sys, Eigen::Index d_h,
                                   Eigen::Index levels, Eigen::Index mu = 0,
                                   Eigen::Index cap = kDefaultDimCap);

json space_to_json(const GradedFockSpace& space);

}  // namespace cpdil
