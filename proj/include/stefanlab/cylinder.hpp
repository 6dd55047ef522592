// SPDX-License-Identifier: Apache-2.0

#ifndef STEFANLAB_CYLINDER_HPP
#define STEFANLAB_CYLINDER_HPP

#include <cmath>

#include "stefanlab/lattice.hpp"

namespace stefanlab {

/// B_rho(x0) x (t0 - theta rho^{sp}, t0]: closed ball, half-open time interval.
struct Cylinder {
  Point x0{0.0, 0.0};
  double t0 = 0.0;
  double rho = 1.0;
  double theta = 1.0;

  double duration(double s, double p) const { return theta * std::pow(rho, s * p); }
  double t_begin(double s, double p) const { return t0 - duration(s, p); }
  bool contains_time(double t, double s, double p) const { return t > t_begin(s, p) && t <= t0; }
  // Relative slack absorbs rounding in lattice coordinates on the sphere.
  bool contains_point(const Point& x, int dim) const { return distance(x, x0, dim) <= rho * (1.0 + 1e-12); }
};

}  // namespace stefanlab

#endif
