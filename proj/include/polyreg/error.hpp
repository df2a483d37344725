#ifndef POLYREG_ERROR_HPP
#define POLYREG_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace polyreg {

enum class ErrorKind {
  invalid_argument,
  invalid_input,
  shape_mismatch,
  invalid_integrand,
  not_in_domain,
  hypothesis_violated,
  undefined_distance,
  invalid_start,
  neighbourhood_empty,
  config,
  io
};

inline std::string_view to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::shape_mismatch: return "shape-mismatch";
    case ErrorKind::invalid_integrand: return "invalid-integrand";
    case ErrorKind::not_in_domain: return "not-in-domain";
    case ErrorKind::hypothesis_violated: return "hypothesis-violated";
    case ErrorKind::undefined_distance: return "undefined-distance";
    case ErrorKind::invalid_start: return "invalid-start";
    case ErrorKind::neighbourhood_empty: return "neighbourhood-empty";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (and tests) can tell a bad argument from a violated hypothesis.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
  {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what)
{
  if (!condition) throw Error(kind, what);
}

} // namespace polyreg

#endif
