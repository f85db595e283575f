#include "errors.hpp"

namespace rbai {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::RowSumViolation: return "RowSumViolation";
    case ErrorCode::NotErgodic: return "NotErgodic";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::TiedBestArm: return "TiedBestArm";
    case ErrorCode::IllegalAction: return "IllegalAction";
    case ErrorCode::DelayOverflow: return "DelayOverflow";
    case ErrorCode::ImpossibleObservation: return "ImpossibleObservation";
    case ErrorCode::ZeroLikelihood: return "ZeroLikelihood";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::ZeroMarginal: return "ZeroMarginal";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::VerifyFailed: return "VerifyFailed";
    }
    return "UnknownError";
}

}  // namespace rbai
