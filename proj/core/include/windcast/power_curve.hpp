#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace windcast {

/// Median-of-k-nearest-neighbors wind-speed to power transfer curve.
/// Neighbors are found by absolute speed distance; exact-distance ties go to
/// the lower training index; an even neighbor count takes the mean of the two
/// central powers.
class PowerCurve {
 public:
  PowerCurve(std::vector<double> speeds, std::vector<double> powers, int k);

  double predict(double speed) const;
  Eigen::VectorXd predict(const Eigen::VectorXd& speeds) const;

  int k() const { return k_; }
  std::ptrdiff_t size() const { return static_cast<std::ptrdiff_t>(speed_.size()); }

  /// (speed, power) samples on a uniform grid spanning the training speeds.
  std::vector<std::pair<double, double>> grid(double step = 0.1) const;

 private:
  // Sorted by (speed, original index); runs of equal speed form blocks so the
  // tie rule can merge candidates from both expansion directions.
  std::vector<double> speed_;
  std::vector<double> power_;
  std::vector<std::ptrdiff_t> original_;
  std::vector<std::ptrdiff_t> block_begin_;  // block index per position
  int k_;
};

PowerCurve fit_power_curve(const std::vector<double>& ws, const std::vector<double>& pw, int k = 250);

Eigen::VectorXd apply_power_curve(const PowerCurve& curve, const Eigen::VectorXd& ws_query);

std::string power_curve_csv(const PowerCurve& curve, double step = 0.1);

}  // namespace windcast
