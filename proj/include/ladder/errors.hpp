#ifndef LADDER_ERRORS_HPP
#define LADDER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ladder {

// Bad input: malformed graph text, configuration outside its window,
// a rung that is not in the alphabet, and so on. The CLI maps this to exit 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A request that is well-formed but exceeds a configured size limit
// (vertex cap, enumeration cap, automaton state cap). The CLI maps this to exit 3.
class FeasibilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Broken internal invariant. Never expected in a correct build.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace ladder

#endif
