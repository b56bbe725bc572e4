#pragma once

#include <stdexcept>
#include <string>

namespace rlab {

// Input errors come from bad configuration or arguments; numerical errors mean
// an internal invariant broke while computing. The CLI maps them to exit codes
// 2 and 3 respectively.
enum class ErrorCategory { Input, Numerical };

class Error : public std::runtime_error {
   public:
    Error(const std::string &kind, const std::string &what, ErrorCategory category)
        : std::runtime_error(kind + ": " + what), kind_(kind), category_(category) {
    }
    const std::string &kind() const noexcept {
        return kind_;
    }
    ErrorCategory category() const noexcept {
        return category_;
    }

   private:
    std::string kind_;
    ErrorCategory category_;
};

#define RLAB_DEFINE_ERROR(Name, Category)                                         \
    class Name : public Error {                                                   \
       public:                                                                    \
        explicit Name(const std::string &what) : Error(#Name, what, Category) { \
        }                                                                         \
    };

RLAB_DEFINE_ERROR(LabelCollision, ErrorCategory::Input)
RLAB_DEFINE_ERROR(LabelNotFound, ErrorCategory::Input)
RLAB_DEFINE_ERROR(SpaceMismatch, ErrorCategory::Input)
RLAB_DEFINE_ERROR(InvalidDimensions, ErrorCategory::Input)
RLAB_DEFINE_ERROR(DegenerateInput, ErrorCategory::Input)
RLAB_DEFINE_ERROR(InvalidDistribution, ErrorCategory::Input)
RLAB_DEFINE_ERROR(RecordCapacityError, ErrorCategory::Input)
RLAB_DEFINE_ERROR(LocalityViolation, ErrorCategory::Input)
RLAB_DEFINE_ERROR(ProtocolOrderError, ErrorCategory::Input)
RLAB_DEFINE_ERROR(UnknownScenario, ErrorCategory::Input)
RLAB_DEFINE_ERROR(UnknownParameter, ErrorCategory::Input)
RLAB_DEFINE_ERROR(ConfigError, ErrorCategory::Input)
RLAB_DEFINE_ERROR(NotHermitian, ErrorCategory::Numerical)
RLAB_DEFINE_ERROR(NotUnitary, ErrorCategory::Numerical)
RLAB_DEFINE_ERROR(InvariantViolation, ErrorCategory::Numerical)

#undef RLAB_DEFINE_ERROR

}  // namespace rlab
