#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace risjam {

inline constexpr double kSpeedOfLight = 299792458.0;

// Minimum separation between a transmitter and a point where its field is
// evaluated.
inline constexpr double kMinDistance = 1e-6;

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Position operator+(const Position& a, const Position& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Position operator-(const Position& a, const Position& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  bool operator==(const Position&) const = default;

  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(const Position& a, const Position& b) {
  const Position d = a - b;
  return std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
}

/// Linear complex amplitude gain of a narrowband channel.
using ComplexGain = std::complex<double>;

inline double power_db(ComplexGain g) { return 10.0 * std::log10(std::norm(g)); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Input that violates a documented contract. `path` names the offending
/// field when the input came from a document.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& message, std::string path = {})
      : std::invalid_argument(path.empty() ? message : path + ": " + message),
        message_(message),
        path_(std::move(path)) {}

  const std::string& message() const noexcept { return message_; }
  const std::string& path() const noexcept { return path_; }

  /// Same error reported below `prefix` in a larger document.
  ValidationError nested(const std::string& prefix) const {
    return ValidationError(message_, path_.empty() ? prefix : prefix + "." + path_);
  }

 private:
  std::string message_;
  std::string path_;
};

}  // namespace risjam
