#pragma once

#include <stdexcept>
#include <string>

namespace perfou {

// Circulant embedding produced an eigenvalue below the negativity tolerance.
class NonnegativeEmbeddingFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Covariance not numerically positive definite, or the size guard was exceeded.
class FactorizationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidStep : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class GridMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class LengthMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class PartialPeriod : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// b/n - |Lambda_n|^2 vanished: the path carries no information about alpha.
class DegenerateDesign : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MissingDriver : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace perfou
