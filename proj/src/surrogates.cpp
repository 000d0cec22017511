#include "uavmec/surrogates.hpp"

#include <cmath>
#include <stdexcept>

namespace uavmec {

double bilinear_surrogate(double a, double b, double aj, double bj, double s) {
  // Same polynomial as the expanded form, without its cancellation.
  const double s2 = s * s;
  return a * b + 0.5 * s2 * (a - aj) * (a - aj) + 0.5 * (b - bj) * (b - bj) / s2;
}

double quartic_slack_lin(double u, double d, double uj, double v0) {
  const double k = d * d / (v0 * v0);
  return (u - uj) * (4 * uj * uj * uj + 2 * k * uj) + k * uj * uj + uj * uj * uj * uj;
}

double separation_lin(const Eigen::Vector2d& qa, const Eigen::Vector2d& qb, const Eigen::Vector2d& qaj,
                      const Eigen::Vector2d& qbj) {
  const Eigen::Vector2d dj = qaj - qbj;
  return dj.squaredNorm() + 2 * dj.dot((qa - qb) - dj);
}

double sqnorm_lin(const Eigen::Vector2d& p, const Eigen::Vector2d& pj) {
  return pj.squaredNorm() + 2 * pj.dot(p - pj);
}

double log_rate_lin(double y, double yj, double alpha) {
  return std::log2(1 + alpha / yj) - alpha * (y - yj) / (yj * (alpha + yj) * std::log(2.0));
}

double speed_slack_lin(double u, double v, double uj, double vj, double v0) {
  return -uj * uj + 2 * u * uj + (-vj * vj + 2 * v * vj) / (v0 * v0);
}

double induced_rhs_lin(double u, double uj, double d_sq_lin, double v0) {
  return 2 * uj * u - uj * uj + d_sq_lin / (v0 * v0);
}

double induced_slack_exact(double tau, double d, double v0) {
  if (!(tau >= 0) || !(d >= 0)) throw std::invalid_argument("induced slack needs tau, d >= 0");
  // u^2 = sqrt(tau^4 + k^2/4) - k/2 with k = (d/v0)^2, rewritten to avoid cancellation.
  const double k = d * d / (v0 * v0);
  const double t4 = tau * tau * tau * tau;
  if (t4 == 0.0) return 0.0;
  const double u2 = t4 / (std::sqrt(t4 + 0.25 * k * k) + 0.5 * k);
  return std::sqrt(u2);
}

Affine add_bilinear_surrogate(ConvexProgram& prog, const Affine& a, const Affine& b, double aj, double bj,
                              double s) {
  const double s2 = s * s;
  const Var w = prog.add_variable("bilin");
  prog.add_square_le(s * a + b * (1.0 / s), 2.0 * Affine(w));
  return Affine(w) - s2 * aj * a + (0.5 * s2 * aj * aj) - (bj / s2) * b + 0.5 * bj * bj / s2;
}

}  // namespace uavmec
