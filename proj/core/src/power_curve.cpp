#include "windcast/power_curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace windcast {

PowerCurve::PowerCurve(std::vector<double> speeds, std::vector<double> powers, int k) : k_(k) {
  if (speeds.empty() || speeds.size() != powers.size())
    throw std::invalid_argument("PowerCurve: empty input or length mismatch");
  if (k < 1) throw std::invalid_argument("PowerCurve: k must be >= 1");
  for (std::size_t i = 0; i < speeds.size(); ++i)
    if (!std::isfinite(speeds[i]) || !std::isfinite(powers[i]))
      throw std::invalid_argument("PowerCurve: non-finite training pair");

  const auto n = speeds.size();
  std::vector<std::ptrdiff_t> order(n);
  std::iota(order.begin(), order.end(), std::ptrdiff_t{0});
  std::sort(order.begin(), order.end(), [&](std::ptrdiff_t a, std::ptrdiff_t b) {
    if (speeds[static_cast<std::size_t>(a)] != speeds[static_cast<std::size_t>(b)])
      return speeds[static_cast<std::size_t>(a)] < speeds[static_cast<std::size_t>(b)];
    return a < b;
  });
  speed_.resize(n);
  power_.resize(n);
  original_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    speed_[i] = speeds[static_cast<std::size_t>(order[i])];
    power_[i] = powers[static_cast<std::size_t>(order[i])];
    original_[i] = order[i];
  }
  block_begin_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    block_begin_[i] = (i > 0 && speed_[i] == speed_[i - 1]) ? block_begin_[i - 1]
                                                            : static_cast<std::ptrdiff_t>(i);
}

double PowerCurve::predict(double speed) const {
  if (!std::isfinite(speed)) throw std::invalid_argument("PowerCurve: non-finite query");
  const auto n = static_cast<std::ptrdiff_t>(speed_.size());
  const auto need_total = std::min<std::ptrdiff_t>(k_, n);

  // Left/right block cursors around the query; a block is one run of equal speed.
  auto it = std::lower_bound(speed_.begin(), speed_.end(), speed);
  std::ptrdiff_t right = it - speed_.begin();
  std::ptrdiff_t left = right > 0 ? block_begin_[static_cast<std::size_t>(right - 1)] : -1;

  std::vector<double> collected;
  collected.reserve(static_cast<std::size_t>(need_total));
  const double inf = std::numeric_limits<double>::infinity();

  const auto block_end = [&](std::ptrdiff_t begin) {
    std::ptrdiff_t e = begin;
    while (e < n && speed_[static_cast<std::size_t>(e)] == speed_[static_cast<std::size_t>(begin)]) ++e;
    return e;
  };
  // Takes up to `need` members of a block in original-index order (the
  // within-block sort order), i.e. the declared tie rule.
  const auto take_block = [&](std::ptrdiff_t begin, std::ptrdiff_t end, std::ptrdiff_t need) {
    for (std::ptrdiff_t i = begin; i < end && need > 0; ++i, --need)
      collected.push_back(power_[static_cast<std::size_t>(i)]);
  };

  while (static_cast<std::ptrdiff_t>(collected.size()) < need_total) {
    const std::ptrdiff_t need = need_total - static_cast<std::ptrdiff_t>(collected.size());
    const double dl = left >= 0 ? speed - speed_[static_cast<std::size_t>(left)] : inf;
    const double dr = right < n ? speed_[static_cast<std::size_t>(right)] - speed : inf;
    if (dl < dr) {
      const auto end = block_end(left);
      take_block(left, end, need);
      left = left > 0 ? block_begin_[static_cast<std::size_t>(left - 1)] : -1;
    } else if (dr < dl) {
      const auto end = block_end(right);
      take_block(right, end, need);
      right = end;
    } else {
      // Equidistant blocks on both sides: merge by original index.
      const auto lend = block_end(left);
      const auto rend = block_end(right);
      std::ptrdiff_t i = left, j = right, taken = 0;
      while (taken < need && (i < lend || j < rend)) {
        const bool from_left =
            j >= rend || (i < lend && original_[static_cast<std::size_t>(i)] < original_[static_cast<std::size_t>(j)]);
        collected.push_back(power_[static_cast<std::size_t>(from_left ? i : j)]);
        (from_left ? i : j) += 1;
        ++taken;
      }
      left = left > 0 ? block_begin_[static_cast<std::size_t>(left - 1)] : -1;
      right = rend;
    }
  }

  std::sort(collected.begin(), collected.end());
  const auto m = collected.size();
  return m % 2 == 1 ? collected[m / 2] : 0.5 * (collected[m / 2 - 1] + collected[m / 2]);
}

Eigen::VectorXd PowerCurve::predict(const Eigen::VectorXd& speeds) const {
  Eigen::VectorXd out(speeds.size());
  for (Eigen::Index i = 0; i < speeds.size(); ++i) out[i] = predict(speeds[i]);
  return out;
}

std::vector<std::pair<double, double>> PowerCurve::grid(double step) const {
  if (!(step > 0.0)) throw std::invalid_argument("PowerCurve::grid: step must be positive");
  const double lo = speed_.front();
  const double hi = speed_.back();
  const auto i0 = static_cast<long long>(std::floor(lo / step));
  const auto i1 = static_cast<long long>(std::ceil(hi / step));
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(i1 - i0 + 1));
  for (long long i = i0; i <= i1; ++i) {
    const double s = static_cast<double>(i) * step;
    out.emplace_back(s, predict(s));
  }
  return out;
}

PowerCurve fit_power_curve(const std::vector<double>& ws, const std::vector<double>& pw, int k) {
  return PowerCurve(ws, pw, k);
}

Eigen::VectorXd apply_power_curve(const PowerCurve& curve, const Eigen::VectorXd& ws_query) {
  return curve.predict(ws_query);
}

std::string power_curve_csv(const PowerCurve& curve, double step) {
  std::string out = "speed,power\n";
  char buf[80];
  for (const auto& [s, p] : curve.grid(step)) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", s, p);
    out += buf;
  }
  return out;
}

}  // namespace windcast
