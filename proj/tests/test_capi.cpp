// Exercises the C interface through the shared library only: handle
// lifecycles, report payloads, error statuses and the thread-local message.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdio>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "cpdil.h"
#include "doctest.h"

using nlohmann::json;

namespace {

std::string fixture(const char* name) {
    return std::string(CPDIL_FIXTURE_DIR) + "/" + name;
}

struct StringOut {
    char* ptr = nullptr;
    ~StringOut() { cpdil_string_free(ptr); }
    json parsed() const {
        REQUIRE(ptr != nullptr);
        return json::parse(ptr);
    }
};

struct PairOut {
    cpdil_pair* ptr = nullptr;
    ~PairOut() { cpdil_pair_free(ptr); }
};

struct RepOut {
    cpdil_rep* ptr = nullptr;
    ~RepOut() { cpdil_rep_free(ptr); }
};

struct DilationOut {
    cpdil_dilation* ptr = nullptr;
    ~DilationOut() { cpdil_dilation_free(ptr); }
};

}  // namespace

TEST_CASE("version and option defaults") {
    REQUIRE(cpdil_version() != nullptr);
    CHECK(std::strlen(cpdil_version()) > 0);

    cpdil_options opts;
    cpdil_options_init(&opts);
    CHECK(opts.levels == 4);
    CHECK(opts.mu == 0);
    CHECK(opts.rank_eps == 1e-9);
    CHECK(opts.accept_eps == 1e-8);
    CHECK(opts.samples == 100);
    CHECK(opts.window == -1);
}

TEST_CASE("parse failures set a status and a message") {
    PairOut pair;
    CHECK(cpdil_pair_parse("this is not json", &pair.ptr) == CPDIL_PARSE_ERROR);
    CHECK(pair.ptr == nullptr);
    CHECK(std::strlen(cpdil_last_error()) > 0);

    CHECK(cpdil_pair_parse("{\"theta\": 3}", &pair.ptr) == CPDIL_PARSE_ERROR);
    CHECK(cpdil_pair_parse(nullptr, &pair.ptr) == CPDIL_INVALID_INPUT);
    CHECK(cpdil_pair_sizes(nullptr, nullptr, nullptr, nullptr) == CPDIL_INVALID_INPUT);

    PairOut missing;
    CHECK(cpdil_pair_from_file("/nonexistent/path.json", &missing.ptr) == CPDIL_IO_ERROR);
}

TEST_CASE("pair analyses on the commuting fixture") {
    PairOut pair;
    REQUIRE(cpdil_pair_from_file(fixture("pair_bitflip050-phaseflip050.json").c_str(),
                                 &pair.ptr) == CPDIL_OK);
    int64_t d = 0, n = 0, m = 0;
    REQUIRE(cpdil_pair_sizes(pair.ptr, &d, &n, &m) == CPDIL_OK);
    CHECK(d == 2);
    CHECK(n == 2);
    CHECK(m == 2);

    int pass = 0;
    StringOut report;
    REQUIRE(cpdil_check_commute(pair.ptr, nullptr, &report.ptr, &pass) == CPDIL_OK);
    CHECK(pass == 1);
    CHECK(report.parsed().at("verdict") == "pass");

    StringOut strong;
    REQUIRE(cpdil_strong_commute(pair.ptr, nullptr, &strong.ptr, &pass) == CPDIL_OK);
    CHECK(pass == 1);
    const json strong_report = strong.parsed();
    bool saw_agreement = false;
    for (const auto& id : strong_report.at("identities"))
        if (id.at("name") == "oracle-agreement") saw_agreement = true;
    CHECK(saw_agreement);

    StringOut flip, flip_report;
    REQUIRE(cpdil_build_flip(pair.ptr, nullptr, &flip.ptr, &flip_report.ptr, &pass) ==
            CPDIL_OK);
    CHECK(pass == 1);
    const json f = flip.parsed();
    CHECK(f.at("n") == 2);
    CHECK(f.at("m") == 2);
    CHECK(f.at("u").at("rows") == 4);
}

TEST_CASE("non-commuting input fails analyses and construction") {
    PairOut pair;
    REQUIRE(cpdil_pair_from_file(fixture("pair_conjugation-x-vs-h.json").c_str(),
                                 &pair.ptr) == CPDIL_OK);
    int pass = 1;
    StringOut report;
    REQUIRE(cpdil_check_commute(pair.ptr, nullptr, &report.ptr, &pass) == CPDIL_OK);
    CHECK(pass == 0);
    CHECK(report.parsed().at("verdict") == "fail");

    DilationOut dil;
    CHECK(cpdil_dilate_pair(pair.ptr, nullptr, &dil.ptr) == CPDIL_NOT_COMMUTING);
    CHECK(std::strlen(cpdil_last_error()) > 0);
}

TEST_CASE("redundant presentations are reduced before dilating") {
    PairOut pair;
    REQUIRE(cpdil_pair_from_file(fixture("pair_redundant.json").c_str(), &pair.ptr) ==
            CPDIL_OK);
    int64_t n = 0, m = 0;
    REQUIRE(cpdil_pair_sizes(pair.ptr, nullptr, &n, &m) == CPDIL_OK);
    CHECK(n == 4);  // as presented

    cpdil_options opts;
    cpdil_options_init(&opts);
    opts.levels = 3;
    DilationOut dil;
    REQUIRE(cpdil_dilate_pair(pair.ptr, &opts, &dil.ptr) == CPDIL_OK);
    int64_t dn = 0, dm = 0, levels = 0, total = 0, depth = 0;
    REQUIRE(cpdil_dilation_sizes(dil.ptr, &dn, &dm, &levels, &total, &depth) == CPDIL_OK);
    CHECK(dn == 2);  // after reduction
    CHECK(dm == 2);
    CHECK(levels == 3);
    CHECK(depth == 2);

    int pass = 0;
    StringOut report;
    REQUIRE(cpdil_dilation_verify(dil.ptr, nullptr, &report.ptr, &pass) == CPDIL_OK);
    CHECK(pass == 1);
}

TEST_CASE("scalar representation end to end") {
    RepOut rep;
    REQUIRE(cpdil_rep_from_file(fixture("rep_scalar.json").c_str(), &rep.ptr) == CPDIL_OK);
    int64_t h = 0, n = 0, m = 0;
    REQUIRE(cpdil_rep_sizes(rep.ptr, &h, &n, &m) == CPDIL_OK);
    CHECK(h == 1);
    CHECK(n == 1);
    CHECK(m == 1);

    DilationOut dil;
    REQUIRE(cpdil_dilate_rep(rep.ptr, nullptr, &dil.ptr) == CPDIL_OK);

    double residual = -1.0;
    REQUIRE(cpdil_dilation_residual(dil.ptr, &residual) == CPDIL_OK);
    CHECK(residual >= 0.0);
    CHECK(residual <= 1e-9);

    StringOut table;
    REQUIRE(cpdil_dilation_word_table(dil.ptr, 3, &table.ptr) == CPDIL_OK);
    bool saw_mixed = false;
    for (const auto& entry : table.parsed()) {
        if (entry.at("a") == 1 && entry.at("b") == 1) {
            saw_mixed = true;
            const double re = entry.at("matrix").at("data").at(0).at(0).get<double>();
            CHECK(re == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
        }
    }
    CHECK(saw_mixed);

    StringOut lean;
    REQUIRE(cpdil_dilation_export(dil.ptr, 0, &lean.ptr) == CPDIL_OK);
    DilationOut imported;
    REQUIRE(cpdil_dilation_import(lean.ptr, nullptr, &imported.ptr) == CPDIL_OK);
    int pass = 0;
    StringOut verify;
    REQUIRE(cpdil_dilation_verify(imported.ptr, nullptr, &verify.ptr, &pass) == CPDIL_OK);
    CHECK(pass == 1);

    StringOut endo;
    REQUIRE(cpdil_endo_verify(dil.ptr, nullptr, &endo.ptr, &pass) == CPDIL_OK);
    CHECK(pass == 1);
}

TEST_CASE("word tables require single-letter tuples") {
    PairOut pair;
    REQUIRE(cpdil_pair_from_file(fixture("pair_bitflip050-phaseflip050.json").c_str(),
                                 &pair.ptr) == CPDIL_OK);
    cpdil_options opts;
    cpdil_options_init(&opts);
    opts.levels = 2;
    DilationOut dil;
    REQUIRE(cpdil_dilate_pair(pair.ptr, &opts, &dil.ptr) == CPDIL_OK);
    StringOut table;
    CHECK(cpdil_dilation_word_table(dil.ptr, 2, &table.ptr) == CPDIL_INVALID_INPUT);
}

TEST_CASE("options are validated") {
    RepOut rep;
    REQUIRE(cpdil_rep_from_file(fixture("rep_scalar.json").c_str(), &rep.ptr) == CPDIL_OK);
    cpdil_options opts;
    cpdil_options_init(&opts);
    opts.levels = 1;
    DilationOut dil;
    CHECK(cpdil_dilate_rep(rep.ptr, &opts, &dil.ptr) == CPDIL_INVALID_INPUT);
    cpdil_options_init(&opts);
    opts.accept_eps = -1.0;
    CHECK(cpdil_dilate_rep(rep.ptr, &opts, &dil.ptr) == CPDIL_INVALID_INPUT);
}

TEST_CASE("round trip through the C interface reports the dropped operator") {
    RepOut rep;
    REQUIRE(cpdil_rep_from_file(fixture("rep_degenerate.json").c_str(), &rep.ptr) ==
            CPDIL_OK);
    int pass = 0;
    StringOut report;
    REQUIRE(cpdil_roundtrip(rep.ptr, nullptr, &report.ptr, &pass) == CPDIL_OK);
    CHECK(pass == 1);
    const json j = report.parsed();
    CHECK(j.at("index_drop_s").get<bool>());
    CHECK(j.at("reduced_m") == 1);
    CHECK(j.at("dim_E_phi") == 1);
}

TEST_CASE("corrupted exports fail verification") {
    std::FILE* f = std::fopen(fixture("dilation_corrupted.json").c_str(), "rb");
    REQUIRE(f != nullptr);
    std::string text;
    char buf[65536];
    size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, got);
    std::fclose(f);

    DilationOut dil;
    REQUIRE(cpdil_dilation_import(text.c_str(), nullptr, &dil.ptr) == CPDIL_OK);
    int pass = 1;
    StringOut report;
    REQUIRE(cpdil_dilation_verify(dil.ptr, nullptr, &report.ptr, &pass) == CPDIL_OK);
    CHECK(pass == 0);
    const json failed_report = report.parsed();
    double worst = 0.0;
    for (const auto& id : failed_report.at("identities"))
        worst = std::max(worst, id.at("max_residual").get<double>());
    CHECK(worst > 1e-3);
}
