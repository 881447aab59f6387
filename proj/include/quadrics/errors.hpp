#pragma once

#include <stdexcept>
#include <string>

namespace quadrics {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularForm : Error { using Error::Error; };
struct BadDimension : Error { using Error::Error; };
struct NotPrimitive : Error { using Error::Error; };
struct ZeroInput : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct NonClassical : Error { using Error::Error; };
struct DegenerateEllipsoid : Error { using Error::Error; };
struct ConstraintUnsatisfiable : Error { using Error::Error; };
struct InvalidInput : Error { using Error::Error; };
struct InvariantViolation : Error { using Error::Error; };

}  // namespace quadrics
