#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stratx {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed map, config file, spec string or unknown identifier.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An action outside the current valid-action set.
class ActionError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Filtering removed every trajectory from a dataset.
class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

/// Collection hit its episode cap before gathering the requested count.
class InsufficientTrajectories : public Error {
public:
    enum class Kind { positive, negative };

    InsufficientTrajectories(Kind kind, std::size_t achieved, std::size_t requested)
        : Error(std::string("insufficient ") + (kind == Kind::positive ? "positive" : "negative") +
                " trajectories: collected " + std::to_string(achieved) + " of " +
                std::to_string(requested)),
          kind_(kind),
          achieved_(achieved),
          requested_(requested) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t achieved() const noexcept { return achieved_; }
    std::size_t requested() const noexcept { return requested_; }

private:
    Kind kind_;
    std::size_t achieved_;
    std::size_t requested_;
};

}  // namespace stratx
