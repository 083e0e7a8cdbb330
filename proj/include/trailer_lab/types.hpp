#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace trailer_lab {

template <typename Scalar, int Rows = Eigen::Dynamic, int Cols = Eigen::Dynamic>
using Matrix = Eigen::Matrix<Scalar, Rows, Cols>;

template <typename Scalar, int Rows = Eigen::Dynamic>
using Vector = Eigen::Matrix<Scalar, Rows, 1>;

template <typename Scalar> using Vector2 = Vector<Scalar, 2>;
template <typename Scalar> using Vector5 = Vector<Scalar, 5>;
template <typename Scalar> using Matrix2 = Matrix<Scalar, 2, 2>;
template <typename Scalar> using RowVector2 = Matrix<Scalar, 1, 2>;

using Point2 = Eigen::Vector2d;

/// Argument outside the domain where the model or a closed-form map is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Configuration rejected by validation. `field()` names the offending entry
/// using a dotted path, e.g. "params.L2".
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message),
        field_(std::move(field)),
        message_(message) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

/// Wraps an angle to (-pi, pi]. std::remainder is odd, so
/// wrap_angle(-a) == -wrap_angle(a) except at the +-pi seam.
template <typename Scalar>
Scalar wrap_angle(Scalar angle) {
  using std::remainder;
  Scalar wrapped = remainder(angle, Scalar(2 * std::numbers::pi));
  if (wrapped <= -Scalar(std::numbers::pi)) wrapped += Scalar(2 * std::numbers::pi);
  return wrapped;
}

template <typename Scalar>
constexpr Scalar deg_to_rad(Scalar degrees) {
  return degrees * Scalar(std::numbers::pi) / Scalar(180);
}

template <typename Scalar>
constexpr Scalar sign(Scalar value) {
  return (Scalar(0) < value) - (value < Scalar(0));
}

}  // namespace trailer_lab
