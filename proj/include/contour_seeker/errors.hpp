#ifndef CONTOUR_SEEKER_ERRORS_HPP
#define CONTOUR_SEEKER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace contour_seeker {

/// Bad user input: malformed spaces, configs, datasets. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what, std::string field = {})
        : std::invalid_argument(what), field_(std::move(field)) {}

    /// Name of the offending config field or argument, empty when not applicable.
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Gram matrix could not be factorized even after jitter escalation.
class IllConditionedError : public std::runtime_error {
public:
    IllConditionedError(const std::string& what, double rcond, double jitter)
        : std::runtime_error(what), rcond_(rcond), jitter_(jitter) {}

    double rcond() const noexcept { return rcond_; }
    double jitter() const noexcept { return jitter_; }

private:
    double rcond_;
    double jitter_;
};

class FitError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class SelectionError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class SimulatorError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number when known (0 otherwise).
class IngestError : public ValidationError {
public:
    IngestError(const std::string& what, std::size_t line)
        : ValidationError(what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A metric could not be computed, e.g. an empty reference contour.
class MetricError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace contour_seeker

#endif  // CONTOUR_SEEKER_ERRORS_HPP
