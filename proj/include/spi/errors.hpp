#pragma once

#include <stdexcept>
#include <string>

namespace spi {

// Base for everything this library throws. Subclasses name the condition;
// the what() string carries the offending values.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- configuration / argument errors ---
struct UnsupportedDegree : Error { using Error::Error; };
struct ZeroSeed          : Error { using Error::Error; };
struct NonPrimitive      : Error { using Error::Error; };
struct IndexOutOfRange   : Error { using Error::Error; };
struct BadFactorization  : Error { using Error::Error; };
struct ShapeMismatch     : Error { using Error::Error; };
struct NonFiniteInput    : Error { using Error::Error; };
struct TooFewSamples     : Error { using Error::Error; };
struct LengthMismatch    : Error { using Error::Error; };
struct BadCrop           : Error { using Error::Error; };
struct IncompleteTrace   : Error { using Error::Error; };
struct CutoffOutOfRange  : Error { using Error::Error; };
struct GridMismatch      : Error { using Error::Error; };
struct BadGamma          : Error { using Error::Error; };
struct TooSmall          : Error { using Error::Error; };
struct DegenerateHistogram : Error { using Error::Error; };
struct ConfigInvalid     : Error { using Error::Error; };

// --- numerical errors ---
struct KernelZero : Error { using Error::Error; };

// --- I/O errors ---
struct IoError           : Error { using Error::Error; };
struct UnsupportedFormat : IoError { using IoError::IoError; };
struct CorruptFile       : IoError { using IoError::IoError; };

}  // namespace spi
