#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mhpolicy {

/// A caller broke a precondition that is not about argument values
/// (layout mismatch, stepping a finished episode, non-finite parameters).
class contract_violation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A Monte-Carlo estimate could not be formed from the collected data.
class estimation_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An output location could not be created or written.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration value is out of range. `field()` names the offending key.
class validation_error : public std::invalid_argument {
public:
    validation_error(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace mhpolicy
