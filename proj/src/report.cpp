#include "cpdil/report.hpp"

#include "cpdil/error.hpp"

namespace cpdil {

void Report::add(std::string name, double residual, std::string window, double accept_eps) {
    identities.push_back({std::move(name), residual, std::move(window)});
    if (!(residual <= accept_eps)) pass = false;
}

double Report::residual_of(const std::string& name) const {
    for (const auto& id : identities) {
        if (id.name == name) return id.max_residual;
    }
    throw Error(ErrorCode::invalid_input, "no identity named '" + name + "' in report");
}

json report_to_json(const Report& report) {
    json ids = json::array();
    for (const auto& id : report.identities) {
        ids.push_back({{"name", id.name},
                       {"max_residual", id.max_residual},
                       {"window", id.window}});
    }
    return json{{"identities", ids}, {"verdict", report.pass ? "pass" : "fail"}};
}

}  // namespace cpdil
