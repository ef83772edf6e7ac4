#include "cpdil.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>

#include "cpdil/dilation.hpp"
#include "cpdil/endo.hpp"
#include "cpdil/error.hpp"
#include "cpdil/flip.hpp"
#include "cpdil/gram.hpp"
#include "cpdil/kraus.hpp"
#include "cpdil/product_system.hpp"
#include "cpdil/report.hpp"

using cpdil::Error;
using cpdil::ErrorCode;
using cpdil::json;
using cpdil::KrausFamily;
using cpdil::Report;
using cpdil::Tolerance;

extern "C" {

struct cpdil_pair {
    KrausFamily theta;
    KrausFamily phi;
};

struct cpdil_rep {
    cpdil::ScalarProductSystem sys;
    cpdil::CovariantRep rep;
};

struct cpdil_dilation {
    cpdil::DilationResult result;
};

}  // extern "C"

namespace {

thread_local std::string g_last_error;

cpdil_status status_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_input: return CPDIL_INVALID_INPUT;
        case ErrorCode::not_positive: return CPDIL_NOT_POSITIVE;
        case ErrorCode::not_partial_isometry: return CPDIL_NOT_PARTIAL_ISOMETRY;
        case ErrorCode::not_commuting: return CPDIL_NOT_COMMUTING;
        case ErrorCode::not_strongly_commuting: return CPDIL_NOT_STRONGLY_COMMUTING;
        case ErrorCode::coisometry_check_failed: return CPDIL_COISOMETRY_CHECK_FAILED;
        case ErrorCode::construction_failed: return CPDIL_CONSTRUCTION_FAILED;
        case ErrorCode::too_large: return CPDIL_TOO_LARGE;
        case ErrorCode::invalid_flip: return CPDIL_INVALID_FLIP;
        case ErrorCode::verification_failed: return CPDIL_VERIFICATION_FAILED;
        case ErrorCode::io_error: return CPDIL_IO_ERROR;
        case ErrorCode::parse_error: return CPDIL_PARSE_ERROR;
        case ErrorCode::not_contractive: return CPDIL_NOT_CONTRACTIVE;
    }
    return CPDIL_UNKNOWN;
}

template <typename Fn>
cpdil_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return CPDIL_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const json::exception& e) {
        g_last_error = std::string("JSON error: ") + e.what();
        return CPDIL_PARSE_ERROR;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CPDIL_UNKNOWN;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void emit_report(const Report& report, char** report_json, int* pass) {
    if (report_json != nullptr) *report_json = dup_string(cpdil::report_to_json(report).dump(2));
    if (pass != nullptr) *pass = report.pass ? 1 : 0;
}

void require(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::invalid_input, what);
}

Tolerance tolerance_of(const cpdil_options* opts) {
    Tolerance tol;
    if (opts != nullptr) {
        require(opts->rank_eps > 0.0 && opts->accept_eps > 0.0, "tolerances must be positive");
        tol.rank_eps = opts->rank_eps;
        tol.accept_eps = opts->accept_eps;
    }
    return tol;
}

cpdil_options defaults() {
    cpdil_options opts;
    opts.levels = 4;
    opts.mu = 0;
    opts.rank_eps = Tolerance{}.rank_eps;
    opts.accept_eps = Tolerance{}.accept_eps;
    opts.seed = 20260823ULL;
    opts.samples = 100;
    opts.window = -1;
    return opts;
}

cpdil_options effective(const cpdil_options* opts) { return opts != nullptr ? *opts : defaults(); }

std::string read_file(const char* path) {
    require(path != nullptr, "path must not be null");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, std::string("cannot open ") + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::io_error, std::string("cannot read ") + path);
    return buf.str();
}

json parse_json(const char* text) {
    require(text != nullptr, "JSON text must not be null");
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::parse_error, "malformed JSON");
    return j;
}

cpdil_pair pair_of_json(const json& j) {
    if (!j.is_object() || !j.contains("theta") || !j.contains("phi"))
        throw Error(ErrorCode::parse_error, "pair JSON needs theta and phi");
    cpdil_pair pair{cpdil::kraus_from_json(j.at("theta")), cpdil::kraus_from_json(j.at("phi"))};
    if (pair.theta.d != pair.phi.d)
        throw Error(ErrorCode::invalid_input, "theta and phi act on different matrix sizes");
    cpdil::validate_family(pair.theta);
    cpdil::validate_family(pair.phi);
    return pair;
}

cpdil_rep rep_of_json(const json& j, const Tolerance& tol) {
    if (!j.is_object() || !j.contains("system") || !j.contains("rep"))
        throw Error(ErrorCode::parse_error, "rep JSON needs system and rep");
    cpdil_rep out{cpdil::system_from_json(j.at("system")),
                  cpdil::rep_from_json(j.at("rep"))};
    cpdil::validate_rep(out.sys, out.rep, tol);
    return out;
}

Eigen::Index family_rank(const KrausFamily& fam, const Tolerance& tol) {
    cpdil::Matrix stacked(fam.d * fam.d, static_cast<Eigen::Index>(fam.ops.size()));
    for (std::size_t i = 0; i < fam.ops.size(); ++i)
        stacked.col(static_cast<Eigen::Index>(i)) = cpdil::vec_row_major(fam.ops[i]);
    return cpdil::kernel_and_range(stacked, tol).rank;
}

cpdil::DilationResult dilate_pair_impl(const cpdil_pair& pair, const cpdil_options& opts) {
    const Tolerance tol = tolerance_of(&opts);
    require(opts.levels >= 2, "dilation needs truncation depth L >= 2");
    require(opts.mu >= 0, "multiplicity growth must be nonnegative");

    KrausFamily theta = pair.theta;
    KrausFamily phi = pair.phi;
    if (family_rank(theta, tol) < static_cast<Eigen::Index>(theta.ops.size()))
        theta = cpdil::reduce_kraus(theta, tol);
    if (family_rank(phi, tol) < static_cast<Eigen::Index>(phi.ops.size()))
        phi = cpdil::reduce_kraus(phi, tol);

    const double commute = cpdil::commute_residual(theta, phi);
    if (!(commute <= tol.accept_eps))
        throw Error(ErrorCode::not_commuting,
                    "cp-commutation residual " + std::to_string(commute) +
                        " exceeds the acceptance threshold");

    const cpdil::FlipUnitary u = cpdil::build_flip_unitary(theta, phi, tol);
    const cpdil::ScalarProductSystem sys = cpdil::make_system(u, tol);
    cpdil::CovariantRep rep;
    rep.h = theta.d;
    rep.T = theta.ops;
    rep.S = phi.ops;
    return cpdil::assemble_dilation(sys, rep, opts.levels, opts.mu, tol);
}

}  // namespace

extern "C" {

void cpdil_options_init(cpdil_options* opts) {
    if (opts != nullptr) *opts = defaults();
}

cpdil_status cpdil_pair_parse(const char* json_text, cpdil_pair** out) {
    return guarded([&] {
        require(out != nullptr, "output handle must not be null");
        *out = new cpdil_pair(pair_of_json(parse_json(json_text)));
    });
}

cpdil_status cpdil_pair_from_file(const char* path, cpdil_pair** out) {
    return guarded([&] {
        require(out != nullptr, "output handle must not be null");
        *out = new cpdil_pair(pair_of_json(parse_json(read_file(path).c_str())));
    });
}

cpdil_status cpdil_pair_sizes(const cpdil_pair* pair, int64_t* d, int64_t* n, int64_t* m) {
    return guarded([&] {
        require(pair != nullptr, "pair handle must not be null");
        if (d != nullptr) *d = pair->theta.d;
        if (n != nullptr) *n = static_cast<int64_t>(pair->theta.ops.size());
        if (m != nullptr) *m = static_cast<int64_t>(pair->phi.ops.size());
    });
}

void cpdil_pair_free(cpdil_pair* pair) { delete pair; }

cpdil_status cpdil_rep_parse(const char* json_text, cpdil_rep** out) {
    return guarded([&] {
        require(out != nullptr, "output handle must not be null");
        *out = new cpdil_rep(rep_of_json(parse_json(json_text), Tolerance{}));
    });
}

cpdil_status cpdil_rep_from_file(const char* path, cpdil_rep** out) {
    return guarded([&] {
        require(out != nullptr, "output handle must not be null");
        *out = new cpdil_rep(rep_of_json(parse_json(read_file(path).c_str()), Tolerance{}));
    });
}

cpdil_status cpdil_rep_sizes(const cpdil_rep* rep, int64_t* h, int64_t* n, int64_t* m) {
    return guarded([&] {
        require(rep != nullptr, "rep handle must not be null");
        if (h != nullptr) *h = rep->rep.h;
        if (n != nullptr) *n = static_cast<int64_t>(rep->rep.T.size());
        if (m != nullptr) *m = static_cast<int64_t>(rep->rep.S.size());
    });
}

void cpdil_rep_free(cpdil_rep* rep) { delete rep; }

cpdil_status cpdil_check_commute(const cpdil_pair* pair, const cpdil_options* opts,
                                 char** report_json, int* pass) {
    return guarded([&] {
        require(pair != nullptr, "pair handle must not be null");
        const cpdil_options eff = effective(opts);
        const Tolerance tol = tolerance_of(&eff);
        Report report;
        report.add("cp-commutation", cpdil::commute_residual(pair->theta, pair->phi),
                   "Choi matrices of both compositions", tol.accept_eps);
        emit_report(report, report_json, pass);
    });
}

cpdil_status cpdil_strong_commute(const cpdil_pair* pair, const cpdil_options* opts,
                                  char** report_json, int* pass) {
    return guarded([&] {
        require(pair != nullptr, "pair handle must not be null");
        const cpdil_options eff = effective(opts);
        const Tolerance tol = tolerance_of(&eff);
        const auto kernel = cpdil::strong_commute_kernel_test(pair->theta, pair->phi, tol);
        const auto direct = cpdil::strong_commute_direct(pair->theta, pair->phi, tol);
        Report report;
        report.add("kernel-dimension-match",
                   std::abs(static_cast<double>(kernel.dim_ker_m - kernel.dim_ker_n)),
                   "composition coisometry kernels", 0.5);
        report.add("coisometry-forward", kernel.residual_m, "products T_i S_j",
                   tol.accept_eps);
        report.add("coisometry-backward", kernel.residual_n, "products S_l T_k",
                   tol.accept_eps);
        report.add("intertwiner-isometry", direct.isometry_residual,
                   "special vectors a (x) I (x) h", tol.accept_eps);
        report.add("complement-dimension-match",
                   std::abs(static_cast<double>(direct.complement_phi_theta -
                                                direct.complement_theta_phi)),
                   "tensor-space complements", 0.5);
        report.add("oracle-agreement", kernel.verdict == direct.verdict ? 0.0 : 1.0,
                   "kernel oracle vs direct oracle", 0.5);
        emit_report(report, report_json, pass);
    });
}

cpdil_status cpdil_build_flip(const cpdil_pair* pair, const cpdil_options* opts,
                              char** flip_json, char** report_json, int* pass) {
    return guarded([&] {
        require(pair != nullptr, "pair handle must not be null");
        const cpdil_options eff = effective(opts);
        const Tolerance tol = tolerance_of(&eff);
        const cpdil::FlipUnitary u = cpdil::build_flip_unitary(pair->theta, pair->phi, tol);
        Report report;
        report.add("flip-unitarity", cpdil::flip_unitarity_residual(u), "u* u = u u* = I",
                   tol.accept_eps);
        report.add("flip-relation",
                   cpdil::flip_relation_residual(pair->theta, pair->phi, u),
                   "T_i S_j = sum u S_l T_k", tol.accept_eps);
        if (flip_json != nullptr) *flip_json = dup_string(cpdil::flip_to_json(u).dump(2));
        emit_report(report, report_json, pass);
    });
}

cpdil_status cpdil_dilate_pair(const cpdil_pair* pair, const cpdil_options* opts,
                               cpdil_dilation** out) {
    return guarded([&] {
        require(pair != nullptr && out != nullptr, "handles must not be null");
        *out = new cpdil_dilation{dilate_pair_impl(*pair, effective(opts))};
    });
}

cpdil_status cpdil_dilate_rep(const cpdil_rep* rep, const cpdil_options* opts,
                              cpdil_dilation** out) {
    return guarded([&] {
        require(rep != nullptr && out != nullptr, "handles must not be null");
        const cpdil_options eff = effective(opts);
        const Tolerance tol = tolerance_of(&eff);
        require(eff.levels >= 2, "dilation needs truncation depth L >= 2");
        require(eff.mu >= 0, "multiplicity growth must be nonnegative");
        *out = new cpdil_dilation{
            cpdil::assemble_dilation(rep->sys, rep->rep, eff.levels, eff.mu, tol)};
    });
}

cpdil_status cpdil_dilation_sizes(const cpdil_dilation* dil, int64_t* n, int64_t* m,
                                  int64_t* levels, int64_t* total_dim,
                                  int64_t* valid_depth) {
    return guarded([&] {
        require(dil != nullptr, "dilation handle must not be null");
        if (n != nullptr) *n = static_cast<int64_t>(dil->result.V.size());
        if (m != nullptr) *m = static_cast<int64_t>(dil->result.U.size());
        if (levels != nullptr) *levels = dil->result.space.levels;
        if (total_dim != nullptr) *total_dim = dil->result.space.total_dim;
        if (valid_depth != nullptr) *valid_depth = dil->result.valid_depth;
    });
}

cpdil_status cpdil_dilation_export(const cpdil_dilation* dil, int include_operators,
                                   char** json_out) {
    return guarded([&] {
        require(dil != nullptr && json_out != nullptr, "handles must not be null");
        *json_out =
            dup_string(cpdil::dilation_to_json(dil->result, include_operators != 0).dump());
    });
}

cpdil_status cpdil_dilation_import(const char* json_text, const cpdil_options* opts,
                                   cpdil_dilation** out) {
    return guarded([&] {
        require(out != nullptr, "output handle must not be null");
        const cpdil_options eff = effective(opts);
        *out = new cpdil_dilation{
            cpdil::dilation_from_json(parse_json(json_text), tolerance_of(&eff))};
    });
}

cpdil_status cpdil_dilation_verify(const cpdil_dilation* dil, const cpdil_options* opts,
                                   char** report_json, int* pass) {
    return guarded([&] {
        require(dil != nullptr, "dilation handle must not be null");
        const cpdil_options eff = effective(opts);
        const Tolerance tol = tolerance_of(&eff);
        const Eigen::Index depth =
            eff.window < 0 ? dil->result.valid_depth - 1 : static_cast<Eigen::Index>(eff.window);
        emit_report(cpdil::verify_dilation(dil->result, depth, tol), report_json, pass);
    });
}

cpdil_status cpdil_dilation_residual(const cpdil_dilation* dil, double* max_residual) {
    return guarded([&] {
        require(dil != nullptr && max_residual != nullptr, "handles must not be null");
        double worst = 0.0;
        for (double r : dil->result.corrector.residual_level) worst = std::max(worst, r);
        *max_residual = worst;
    });
}

cpdil_status cpdil_dilation_word_table(const cpdil_dilation* dil, int64_t max_len,
                                       char** json_out) {
    return guarded([&] {
        require(dil != nullptr && json_out != nullptr, "handles must not be null");
        require(dil->result.V.size() == 1 && dil->result.U.size() == 1,
                "word table is defined for single-operator tuples only");
        require(max_len >= 0, "word length bound must be nonnegative");
        json table = json::array();
        for (int64_t a = 0; a <= max_len; ++a)
            for (int64_t b = 0; a + b <= max_len; ++b) {
                std::vector<cpdil::Letter> word;
                for (int64_t i = 0; i < a; ++i) word.emplace_back(cpdil::Side::T, 0);
                for (int64_t j = 0; j < b; ++j) word.emplace_back(cpdil::Side::S, 0);
                table.push_back(
                    {{"a", a},
                     {"b", b},
                     {"matrix", cpdil::matrix_to_json(cpdil::compress_word(dil->result, word))}});
            }
        *json_out = dup_string(table.dump(2));
    });
}

void cpdil_dilation_free(cpdil_dilation* dil) { delete dil; }

cpdil_status cpdil_endo_verify(const cpdil_dilation* dil, const cpdil_options* opts,
                               char** report_json, int* pass) {
    return guarded([&] {
        require(dil != nullptr, "dilation handle must not be null");
        const cpdil_options eff = effective(opts);
        const Tolerance tol = tolerance_of(&eff);
        require(eff.samples >= 1, "sample count must be positive");
        cpdil::EndoOptions eo;
        eo.depth = eff.window < 0 ? dil->result.space.levels - 2
                                  : static_cast<Eigen::Index>(eff.window);
        eo.samples = static_cast<Eigen::Index>(eff.samples);
        eo.commutation_samples =
            std::max<Eigen::Index>(1, std::min<Eigen::Index>(eo.samples, 12));
        eo.seed = eff.seed;
        const auto induced = cpdil::induced_cp_pair(dil->result.rep);
        const cpdil::EndoPair pair = cpdil::lift_endomorphisms(dil->result);
        emit_report(
            cpdil::verify_endomorphic_dilation(pair, induced.first, induced.second, eo, tol),
            report_json, pass);
    });
}

cpdil_status cpdil_roundtrip(const cpdil_rep* rep, const cpdil_options* opts,
                             char** report_json, int* pass) {
    return guarded([&] {
        require(rep != nullptr, "rep handle must not be null");
        const cpdil_options eff = effective(opts);
        const Tolerance tol = tolerance_of(&eff);
        const cpdil::RoundtripReport out =
            cpdil::roundtrip_metric_spaces(rep->sys, rep->rep, tol);
        if (report_json != nullptr)
            *report_json = dup_string(cpdil::roundtrip_to_json(out).dump(2));
        if (pass != nullptr) *pass = out.pass ? 1 : 0;
    });
}

const char* cpdil_last_error(void) { return g_last_error.c_str(); }

void cpdil_string_free(char* s) { std::free(s); }

const char* cpdil_version(void) { return "0.1.0"; }

}  // extern "C"
