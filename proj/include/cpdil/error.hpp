// Error taxonomy shared by the whole library and mirrored by the C API.
#pragma once

#include <stdexcept>
#include <string>

namespace cpdil {

enum class ErrorCode {
    invalid_input = 1,
    not_positive = 2,
    not_partial_isometry = 3,
    not_commuting = 4,
    not_strongly_commuting = 5,
    coisometry_check_failed = 6,
    construction_failed = 7,
    too_large = 8,
    invalid_flip = 9,
    verification_failed = 10,
    io_error = 11,
    parse_error = 12,
    not_contractive = 13,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace cpdil
