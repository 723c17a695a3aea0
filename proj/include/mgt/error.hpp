#pragma once

#include <stdexcept>
#include <string>

namespace mgt {

enum class Code {
    Ok = 0,
    NonDissipative,
    ConservativeCase,
    InvalidDimension,
    OutOfRange,
    Domain,
    OutOfZone,
    StepFailure,
    UnsupportedDimension,
    Overflow,
    RadiusExceedsBox,
    InsufficientData,
    NonPositiveValues,
    ZeroMass,
    ParameterWindowViolation,
    DimensionTooLow,
    InadmissibleTriple,
    Config,
    IO,
    InvalidArgument,
    Internal
};

const char* code_name(Code c);

class Error : public std::runtime_error {
public:
    Error(Code c, const std::string& msg) : std::runtime_error(msg), code_(c) {}
    Code code() const { return code_; }

private:
    Code code_;
};

}  // namespace mgt
