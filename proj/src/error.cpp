#include "mgt/error.hpp"

namespace mgt {

const char* code_name(Code c)
{
    switch (c) {
    case Code::Ok: return "Ok";
    case Code::NonDissipative: return "NonDissipative";
    case Code::ConservativeCase: return "ConservativeCase";
    case Code::InvalidDimension: return "InvalidDimension";
    case Code::OutOfRange: return "OutOfRange";
    case Code::Domain: return "Domain";
    case Code::OutOfZone: return "OutOfZone";
    case Code::StepFailure: return "StepFailure";
    case Code::UnsupportedDimension: return "UnsupportedDimension";
    case Code::Overflow: return "Overflow";
    case Code::RadiusExceedsBox: return "RadiusExceedsBox";
    case Code::InsufficientData: return "InsufficientData";
    case Code::NonPositiveValues: return "NonPositiveValues";
    case Code::ZeroMass: return "ZeroMass";
    case Code::ParameterWindowViolation: return "ParameterWindowViolation";
    case Code::DimensionTooLow: return "DimensionTooLow";
    case Code::InadmissibleTriple: return "InadmissibleTriple";
    case Code::Config: return "ConfigError";
    case Code::IO: return "IOError";
    case Code::InvalidArgument: return "InvalidArgument";
    case Code::Internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace mgt
