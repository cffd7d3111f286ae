#pragma once

#include <stdexcept>
#include <string>

namespace mvocc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Input and configuration problems. The CLI maps these to exit status 1.
class ConfigError : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class AlignmentError : public Error { using Error::Error; };
class StratificationError : public Error { using Error::Error; };
class SplitError : public Error { using Error::Error; };
class ParameterError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class ContractError : public Error { using Error::Error; };
class OracleScaleError : public Error { using Error::Error; };

// Numerical failures during compute. The CLI maps these to exit status 2.
class NumericError : public Error { using Error::Error; };
class InfeasibleError : public Error { using Error::Error; };
class DegenerateKernelError : public Error { using Error::Error; };
class DivergenceError : public Error { using Error::Error; };
class ProtocolError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

} // namespace mvocc
