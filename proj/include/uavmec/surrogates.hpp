#pragma once

#include "uavmec/convex_program.hpp"

#include <Eigen/Core>

namespace uavmec {

// Convex majorizer of a*b tight at (aj, bj):
//   (sa + b/s)^2/2 - (2 s^2 a aj - s^2 aj^2)/2 - (2 b bj/s^2 - bj^2/s^2)/2.
// s = 1 is the plain form; other scales only trade curvature between the
// two arguments, since ab = (sa)(b/s).
double bilinear_surrogate(double a, double b, double aj, double bj, double s = 1.0);

// Minorizer of u^4 + d^2 u^2 / v0^2, linearised in u at uj (d fixed).
double quartic_slack_lin(double u, double d, double uj, double v0);

// Minorizer of ||qa - qb||^2 around (qaj, qbj).
double separation_lin(const Eigen::Vector2d& qa, const Eigen::Vector2d& qb, const Eigen::Vector2d& qaj,
                      const Eigen::Vector2d& qbj);

// Minorizer of ||p||^2 around pj.
double sqnorm_lin(const Eigen::Vector2d& p, const Eigen::Vector2d& pj);

// Minorizer of log2(1 + alpha / y) around yj (the function is convex in y).
double log_rate_lin(double y, double yj, double alpha);

// Minorizer of u^2 + v^2 / v0^2 around (uj, vj).
double speed_slack_lin(double u, double v, double uj, double vj, double v0);

// Minorizer of u^2 + D / v0^2 with u^2 linearised at uj and D already a
// minorizer of the squared flight distance.
double induced_rhs_lin(double u, double uj, double d_sq_lin, double v0);

// Slack u > 0 with u^4 + (d/v0)^2 u^2 = tau^4, i.e. the induced-power factor
// of a unit of duration tau covering distance d (energy = Pi * u).
double induced_slack_exact(double tau, double d, double v0);

// Adds w >= (s a + b / s)^2 / 2 to the program and returns the affine form of
// bilinear_surrogate(a, b, aj, bj, s) in terms of w.
Affine add_bilinear_surrogate(ConvexProgram& prog, const Affine& a, const Affine& b, double aj, double bj,
                              double s = 1.0);

}  // namespace uavmec
