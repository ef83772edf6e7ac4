// Residual reports: one named identity per checked equation, with the grade
// window it was compressed to and a single pass/fail verdict.
#pragma once

#include <string>
#include <vector>

#include "cpdil/linalg.hpp"

namespace cpdil {

struct IdentityResidual {
    std::string name;
    double max_residual = 0.0;
    std::string window;
};

struct Report {
    std::vector<IdentityResidual> identities;
    bool pass = true;

    void add(std::string name, double residual, std::string window, double accept_eps);
    double residual_of(const std::string& name) const;
};

// {"identities": [{"name", "max_residual", "window"}, ...], "verdict": "pass|fail"}
json report_to_json(const Report& report);

}  // namespace cpdil
