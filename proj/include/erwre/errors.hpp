#ifndef ERWRE_ERRORS_HPP
#define ERWRE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace erwre {

// Parameter combinations that the recurrence criteria do not cover
// (e.g. a non-subcritical branching process).
class UnsupportedRegimeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Invalid experiment configuration or command line.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A pathwise identity that must hold exactly was observed to fail.
class AssertionFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace erwre

#endif // ERWRE_ERRORS_HPP
