#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bomai {

/// Root of every error the engine raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exhaustive enumeration would exceed the configured cap.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, std::uint64_t required, std::uint64_t cap)
      : Error(what + ": enumeration needs " + std::to_string(required) +
              " items, cap is " + std::to_string(cap)),
        required_(required),
        cap_(cap) {}

  std::uint64_t required() const { return required_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t required_;
  std::uint64_t cap_;
};

/// A world-model assigns probability zero to the conditioning history.
class InconsistentHistory : public Error {
 public:
  using Error::Error;
};

/// The Bayes mixture assigns probability zero to an observed percept.
class ImpossibleObservation : public Error {
 public:
  using Error::Error;
};

/// No policy in the mentor class explains an observed mentor action.
class InconsistentMentor : public Error {
 public:
  using Error::Error;
};

/// Invalid or unsatisfiable experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A broken internal invariant. Always a defect, never a user error.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace bomai
