#pragma once

#include <stdexcept>
#include <string>

namespace ffil {

/// Precondition or mathematical domain violation (zero inverse, dimension mismatch, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A search/enumeration cap or retry cap was hit. Never means "answer is no".
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed fixture text.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ffil
