#include "sfl/errors.hpp"

namespace sfl {

std::string_view errc_name(Errc e) {
  switch (e) {
    case Errc::NonIntegrableSingularity: return "NonIntegrableSingularity";
    case Errc::UnsupportedKind: return "UnsupportedKind";
    case Errc::InfiniteInfimum: return "InfiniteInfimum";
    case Errc::Inconclusive: return "Inconclusive";
    case Errc::NonFinite: return "NonFinite";
    case Errc::DomainMismatch: return "DomainMismatch";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::CoercivityViolation: return "CoercivityViolation";
    case Errc::RangeExceeded: return "RangeExceeded";
    case Errc::NoRootInBracket: return "NoRootInBracket";
    case Errc::CrossCheckMismatch: return "CrossCheckMismatch";
    case Errc::BracketTooNarrow: return "BracketTooNarrow";
    case Errc::ExponentOutOfWindow: return "ExponentOutOfWindow";
    case Errc::SignClash: return "SignClash";
    case Errc::MembershipFailure: return "MembershipFailure";
    case Errc::ZeroAtSplice: return "ZeroAtSplice";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace sfl
