#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sfl {

enum class Errc {
  NonIntegrableSingularity,
  UnsupportedKind,
  InfiniteInfimum,
  Inconclusive,
  NonFinite,
  DomainMismatch,
  NoConvergence,
  CoercivityViolation,
  RangeExceeded,
  NoRootInBracket,
  CrossCheckMismatch,
  BracketTooNarrow,
  ExponentOutOfWindow,
  SignClash,
  MembershipFailure,
  ZeroAtSplice,
  BudgetExceeded,
  ConfigError,
  IoError,
  InvalidArgument,
};

std::string_view errc_name(Errc e);

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

}  // namespace sfl
