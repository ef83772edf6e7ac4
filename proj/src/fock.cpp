#include "cpdil/fock.hpp"

namespace cpdil {

static Eigen::Index ipow(Eigen::Index base, Eigen::Index exp) {
    Eigen::Index out = 1;
    for (Eigen::Index i = 0; i < exp; ++i) out *= base;
    return out;
}

Eigen::Index GradedFockSpace::block_index(Eigen::Index a, Eigen::Index b) const {
    const Eigen::Index level = std::max(a, b);
    if (a < 0 || b < 0 || level > levels)
        throw Error(ErrorCode::invalid_input, "grade outside the truncated space");
    // Within a level the (a, b) pairs in lex order are (0,l)..(l-1,l), (l,0)..(l,l).
    Eigen::Index before = 0;
    for (Eigen::Index l = 0; l < level; ++l) before += 2 * l + 1;
    const Eigen::Index within = a < level ? a : level + b;
    return before + within;
}

GradedFockSpace build_graded_space(const ScalarProductSystem& sys, Eigen::Index d_h,
                                   Eigen::Index levels, Eigen::Index mu,
                                   Eigen::Index cap) {
    if (d_h <= 0 || levels < 0 || mu < 0)
        throw Error(ErrorCode::invalid_input, "graded space needs d_h >= 1, L >= 0, mu >= 0");
    GradedFockSpace space;
    space.n = sys.n();
    space.m = sys.m();
    space.d_h = d_h;
    space.levels = levels;
    space.mu = mu;
    Eigen::Index hd = d_h;
    for (Eigen::Index l = 0; l <= levels; ++l) {
        space.h_dims.push_back(hd);
        if (l < levels) hd *= 1 + mu;
    }
    Eigen::Index offset = 0;
    for (Eigen::Index level = 0; level <= levels; ++level) {
        space.level_offset.push_back(offset);
        for (Eigen::Index a = 0; a <= level; ++a) {
            const auto emit = [&](Eigen::Index aa, Eigen::Index bb) {
                GradeBlock blk;
                blk.a = aa;
                blk.b = bb;
                blk.offset = offset;
                blk.e_dim = ipow(space.n, aa);
                blk.f_dim = ipow(space.m, bb);
                blk.h_dim = space.h_dims[level];
                offset += blk.size();
                space.blocks.push_back(blk);
            };
            if (a < level) {
                emit(a, level);
            } else {
                for (Eigen::Index b = 0; b <= level; ++b) emit(level, b);
            }
            if (offset > cap)
                throw Error(ErrorCode::too_large,
                            "truncated space exceeds the dimension cap of " +
                                std::to_string(cap));
        }
    }
    space.level_offset.push_back(offset);
    space.total_dim = offset;
    return space;
}

json space_to_json(const GradedFockSpace& space) {
    json level_dims = json::array();
    for (Eigen::Index l = 0; l <= space.levels; ++l) level_dims.push_back(space.level_dim(l));
    return json{{"n", space.n},          {"m", space.m},
                {"d_H", space.d_h},      {"L", space.levels},
                {"mu", space.mu},        {"level_dims", std::move(level_dims)},
                {"total_dim", space.total_dim}};
}

}  // namespace cpdil
