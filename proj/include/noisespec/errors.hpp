#ifndef NOISESPEC_ERRORS_HPP
#define NOISESPEC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace noisespec {

// Invalid user input: out-of-domain parameters, malformed config or files.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The integration produced a non-finite state.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, long long step)
        : std::runtime_error(what), step_index(step) {}
    long long step_index;
};

// Not enough usable data to produce a result (too few peaks, samples, ...).
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace noisespec

#endif
