#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace wbf {

using scalar_t = double;
using vector_t = Eigen::VectorXd;
using matrix_t = Eigen::MatrixXd;
using vector3_t = Eigen::Vector3d;
using matrix3_t = Eigen::Matrix3d;
using quaternion_t = Eigen::Quaterniond;

// Thrown on malformed input text (config files, scenario files).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when parsed input is well-formed but semantically invalid
// (bad limits, unknown link names, non-positive masses, ...).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when matrix/vector dimensions passed across module boundaries disagree.
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

inline matrix3_t skew(const vector3_t& v) {
  matrix3_t s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

// Rotation matrix for a rotation of |w| radians about w (exponential map).
inline matrix3_t exp_so3(const vector3_t& w) {
  const scalar_t angle = w.norm();
  if (angle < 1e-12) {
    return matrix3_t::Identity() + skew(w);
  }
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

}  // namespace wbf
