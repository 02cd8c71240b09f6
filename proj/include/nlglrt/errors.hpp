#pragma once

#include <stdexcept>
#include <string>

namespace nlglrt {

// Base class for every error thrown by this library, so callers can catch
// one type at the process boundary.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class NonSquare : public Error { public: using Error::Error; };
class DimensionMismatch : public Error { public: using Error::Error; };
class NotPositiveDefinite : public Error { public: using Error::Error; };
class InvalidConfig : public Error { public: using Error::Error; };
class WindowTooLarge : public Error { public: using Error::Error; };
class EmptyInput : public Error { public: using Error::Error; };
class ShapeMismatch : public Error { public: using Error::Error; };
class NonFiniteLoss : public Error { public: using Error::Error; };
class OnsetOutOfRange : public Error { public: using Error::Error; };
class DegenerateLabels : public Error { public: using Error::Error; };
class InsufficientSamples : public Error { public: using Error::Error; };
class MissingArtifact : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

}  // namespace nlglrt
