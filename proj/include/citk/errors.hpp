#pragma once

#include <stdexcept>
#include <string>

namespace citk {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct AlphabetMismatch : Error { using Error::Error; };
struct MarginalMismatch : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct SearchSpaceTooLarge : Error { using Error::Error; };
struct ConstraintViolation : Error { using Error::Error; };
struct SizeGuard : Error { using Error::Error; };
struct CapExceeded : Error { using Error::Error; };
struct GridTooCoarse : Error { using Error::Error; };
struct QuadratureFailure : Error { using Error::Error; };
struct OdeStepFailure : Error { using Error::Error; };

}  // namespace citk
