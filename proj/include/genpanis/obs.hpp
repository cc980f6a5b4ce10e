#pragma once

#include <string>

#include <Eigen/Dense>

#include "genpanis/common.hpp"

namespace genpanis {

/// Observation-location specification, parsed from text:
///   "grid KxK"            K x K cell centers ((i+0.5)/K, (j+0.5)/K)
///   "random N seed=S"     N uniform points in the unit square
///   "points x,y;x,y;..."  explicit coordinate list
struct ObsSpec {
  enum class Kind { Grid, Random, Explicit };
  Kind kind = Kind::Grid;
  int k = 0;
  int n = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixX2d explicit_pts;

  static ObsSpec grid(int k);
  static ObsSpec random(int n, std::uint64_t seed);
  static ObsSpec parse(const std::string& text);

  Eigen::MatrixX2d locations() const;
  int count() const;
  std::string str() const;
};

}  // namespace genpanis
