#ifndef HCF_ERROR_HPP
#define HCF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hcf {

/// Argument outside the domain of a physical formula (non-positive width, T <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed input file or CSV.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A loaded or constructed object violates one of its invariants.
class InvariantError : public std::runtime_error {
 public:
  InvariantError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The linearized fit problem is rank deficient; names the offending pair.
class SingularFitError : public std::runtime_error {
 public:
  SingularFitError(std::string first, std::string second)
      : std::runtime_error("singular Jacobian: parameters '" + first + "' and '" + second +
                           "' are degenerate"),
        first_(std::move(first)),
        second_(std::move(second)) {}
  const std::string& first() const noexcept { return first_; }
  const std::string& second() const noexcept { return second_; }

 private:
  std::string first_;
  std::string second_;
};

/// Input data that cannot be analysed as requested (too short, no peak, inconsistent).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hcf

#endif  // HCF_ERROR_HPP
