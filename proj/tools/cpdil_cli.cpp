// Command-line front end for the cpdil shared library. All mathematics is
// reached through the C interface; this file only parses arguments, moves
// JSON between files and the library, and maps outcomes to exit codes:
// 0 = all identities pass, 1 = a mathematical check failed, 2 = bad input.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cpdil.h"

namespace {

using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

int exit_code_for(cpdil_status status) {
    switch (status) {
        case CPDIL_OK:
            return kExitPass;
        case CPDIL_NOT_COMMUTING:
        case CPDIL_NOT_STRONGLY_COMMUTING:
        case CPDIL_NOT_PARTIAL_ISOMETRY:
        case CPDIL_COISOMETRY_CHECK_FAILED:
        case CPDIL_CONSTRUCTION_FAILED:
        case CPDIL_VERIFICATION_FAILED:
            return kExitFail;
        default:
            return kExitInput;
    }
}

int report_failure(cpdil_status status) {
    std::cerr << "error: " << cpdil_last_error() << "\n";
    return exit_code_for(status);
}

// Owns a char* produced by the library.
class OwnedString {
  public:
    ~OwnedString() { cpdil_string_free(ptr_); }
    char** slot() { return &ptr_; }
    bool empty() const { return ptr_ == nullptr; }
    std::string str() const { return ptr_ != nullptr ? std::string(ptr_) : std::string(); }

  private:
    char* ptr_ = nullptr;
};

struct PairHandle {
    cpdil_pair* get = nullptr;
    ~PairHandle() { cpdil_pair_free(get); }
};

struct RepHandle {
    cpdil_rep* get = nullptr;
    ~RepHandle() { cpdil_rep_free(get); }
};

struct DilationHandle {
    cpdil_dilation* get = nullptr;
    ~DilationHandle() { cpdil_dilation_free(get); }
};

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        return false;
    }
    return true;
}

struct Invocation {
    std::string input;
    std::string out;
    bool input_is_rep = false;
    bool export_operators = false;
    int64_t word_table_len = 3;
    cpdil_options opts{};
};

void add_common_flags(CLI::App* cmd, Invocation& inv, bool with_depth) {
    cmd->add_option("--input", inv.input, "input JSON file")->required();
    cmd->add_option("--out", inv.out, "write the full result JSON here");
    cmd->add_option("--accept", inv.opts.accept_eps, "identity acceptance threshold")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tol", inv.opts.rank_eps, "numerical-rank threshold")
        ->check(CLI::PositiveNumber);
    if (with_depth) {
        cmd->add_option("--depth", inv.opts.levels, "truncation depth L (>= 2)")
            ->check(CLI::Range(static_cast<int64_t>(2), static_cast<int64_t>(64)));
        cmd->add_option("--mu", inv.opts.mu, "extra multiplicity growth per level")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--window", inv.opts.window,
                        "verification window depth (-1 = widest valid)");
        cmd->add_option("--seed", inv.opts.seed, "seed for sampled identities");
        cmd->add_option("--samples", inv.opts.samples, "sample count for sampled identities")
            ->check(CLI::PositiveNumber);
    }
}

int emit(const OwnedString& report, int pass, const Invocation& inv) {
    const std::string text = report.str();
    if (!text.empty()) std::cout << text << "\n";
    if (!inv.out.empty() && !write_file(inv.out, text + "\n")) return kExitInput;
    return pass != 0 ? kExitPass : kExitFail;
}

int run_pair_analysis(const Invocation& inv,
                      cpdil_status (*fn)(const cpdil_pair*, const cpdil_options*, char**,
                                         int*)) {
    PairHandle pair;
    cpdil_status st = cpdil_pair_from_file(inv.input.c_str(), &pair.get);
    if (st != CPDIL_OK) return report_failure(st);
    OwnedString report;
    int pass = 0;
    st = fn(pair.get, &inv.opts, report.slot(), &pass);
    if (st != CPDIL_OK) return report_failure(st);
    return emit(report, pass, inv);
}

int run_flip(const Invocation& inv) {
    PairHandle pair;
    cpdil_status st = cpdil_pair_from_file(inv.input.c_str(), &pair.get);
    if (st != CPDIL_OK) return report_failure(st);
    OwnedString flip, report;
    int pass = 0;
    st = cpdil_build_flip(pair.get, &inv.opts, flip.slot(), report.slot(), &pass);
    if (st != CPDIL_OK) return report_failure(st);
    std::cout << report.str() << "\n";
    if (!inv.out.empty()) {
        json merged = json::parse(flip.str());
        merged["report"] = json::parse(report.str());
        if (!write_file(inv.out, merged.dump(2) + "\n")) return kExitInput;
    }
    return pass != 0 ? kExitPass : kExitFail;
}

// Shared front half of `dilate` and `endo`: produce a dilation from either a
// pair file (with an explicit commutation gate first, so a non-commuting pair
// yields a fail report rather than a bare error) or a rep file.
int make_dilation(const Invocation& inv, DilationHandle& dil) {
    if (inv.input_is_rep) {
        RepHandle rep;
        cpdil_status st = cpdil_rep_from_file(inv.input.c_str(), &rep.get);
        if (st != CPDIL_OK) return report_failure(st);
        st = cpdil_dilate_rep(rep.get, &inv.opts, &dil.get);
        if (st != CPDIL_OK) return report_failure(st);
        return -1;
    }
    PairHandle pair;
    cpdil_status st = cpdil_pair_from_file(inv.input.c_str(), &pair.get);
    if (st != CPDIL_OK) return report_failure(st);
    OwnedString gate;
    int commute_pass = 0;
    st = cpdil_check_commute(pair.get, &inv.opts, gate.slot(), &commute_pass);
    if (st != CPDIL_OK) return report_failure(st);
    if (commute_pass == 0) {
        std::cout << gate.str() << "\n";
        std::cerr << "error: the CP maps do not commute; no dilation exists\n";
        return kExitFail;
    }
    st = cpdil_dilate_pair(pair.get, &inv.opts, &dil.get);
    if (st != CPDIL_OK) return report_failure(st);
    return -1;  // success sentinel; caller continues
}

int run_dilate(const Invocation& inv) {
    DilationHandle dil;
    const int early = make_dilation(inv, dil);
    if (early >= 0) return early;

    OwnedString report;
    int pass = 0;
    cpdil_status st = cpdil_dilation_verify(dil.get, &inv.opts, report.slot(), &pass);
    if (st != CPDIL_OK) return report_failure(st);
    std::cout << report.str() << "\n";

    if (!inv.out.empty()) {
        OwnedString exported;
        st = cpdil_dilation_export(dil.get, inv.export_operators ? 1 : 0, exported.slot());
        if (st != CPDIL_OK) return report_failure(st);
        json merged = json::parse(exported.str());
        merged["report"] = json::parse(report.str());
        int64_t n = 0, m = 0;
        if (cpdil_dilation_sizes(dil.get, &n, &m, nullptr, nullptr, nullptr) == CPDIL_OK &&
            n == 1 && m == 1) {
            OwnedString table;
            st = cpdil_dilation_word_table(dil.get, inv.word_table_len, table.slot());
            if (st != CPDIL_OK) return report_failure(st);
            merged["word_table"] = json::parse(table.str());
        }
        if (!write_file(inv.out, merged.dump(2) + "\n")) return kExitInput;
    }
    return pass != 0 ? kExitPass : kExitFail;
}

int run_verify(const Invocation& inv) {
    std::ifstream in(inv.input, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open " << inv.input << "\n";
        return kExitInput;
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    DilationHandle dil;
    cpdil_status st = cpdil_dilation_import(text.c_str(), &inv.opts, &dil.get);
    if (st != CPDIL_OK) return report_failure(st);
    OwnedString report;
    int pass = 0;
    st = cpdil_dilation_verify(dil.get, &inv.opts, report.slot(), &pass);
    if (st != CPDIL_OK) return report_failure(st);
    return emit(report, pass, inv);
}

int run_endo(const Invocation& inv) {
    DilationHandle dil;
    const int early = make_dilation(inv, dil);
    if (early >= 0) return early;
    OwnedString report;
    int pass = 0;
    cpdil_status st = cpdil_endo_verify(dil.get, &inv.opts, report.slot(), &pass);
    if (st != CPDIL_OK) return report_failure(st);
    return emit(report, pass, inv);
}

int run_roundtrip(const Invocation& inv) {
    RepHandle rep;
    cpdil_status st = cpdil_rep_from_file(inv.input.c_str(), &rep.get);
    if (st != CPDIL_OK) return report_failure(st);
    OwnedString report;
    int pass = 0;
    st = cpdil_roundtrip(rep.get, &inv.opts, report.slot(), &pass);
    if (st != CPDIL_OK) return report_failure(st);
    return emit(report, pass, inv);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"commuting CP-map dilation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cpdil_version()));

    Invocation inv;
    cpdil_options_init(&inv.opts);

    auto* check = app.add_subcommand("check-commute",
                                     "Choi-matrix commutation test for a CP-map pair");
    add_common_flags(check, inv, false);

    auto* strong = app.add_subcommand(
        "strong-commute", "kernel-dimension and direct tensor-space commutation oracles");
    add_common_flags(strong, inv, false);

    auto* flip =
        app.add_subcommand("flip", "build the exchange unitary of a commuting pair");
    add_common_flags(flip, inv, false);

    auto* dilate = app.add_subcommand(
        "dilate", "assemble and verify the isometric dilation on the truncated space");
    add_common_flags(dilate, inv, true);
    dilate->add_flag("--rep", inv.input_is_rep, "input file holds a system + rep");
    dilate->add_flag("--export-operators", inv.export_operators,
                     "embed the assembled sparse operators in --out");
    dilate->add_option("--word-table-len", inv.word_table_len,
                       "max word length for the scalar word table in --out")
        ->check(CLI::Range(static_cast<int64_t>(0), static_cast<int64_t>(16)));

    auto* verify =
        app.add_subcommand("verify", "re-verify an exported dilation result file");
    add_common_flags(verify, inv, true);

    auto* endo = app.add_subcommand(
        "endo", "lift the dilation to the endomorphism pair and verify it");
    add_common_flags(endo, inv, true);
    endo->add_flag("--rep", inv.input_is_rep, "input file holds a system + rep");

    auto* roundtrip = app.add_subcommand(
        "roundtrip", "rep -> induced CP pair -> intertwiner dims -> rebuilt exchange unitary");
    add_common_flags(roundtrip, inv, false);

    CLI11_PARSE(app, argc, argv);

    if (check->parsed()) return run_pair_analysis(inv, &cpdil_check_commute);
    if (strong->parsed()) return run_pair_analysis(inv, &cpdil_strong_commute);
    if (flip->parsed()) return run_flip(inv);
    if (dilate->parsed()) return run_dilate(inv);
    if (verify->parsed()) return run_verify(inv);
    if (endo->parsed()) return run_endo(inv);
    if (roundtrip->parsed()) return run_roundtrip(inv);
    return kExitInput;
}
