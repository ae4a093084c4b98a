#include "geohealth/spatial_cv/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace geohealth::cv {

Metrics compute_metrics(const Vector& yhat, const Vector& y, const Mask& mask, Diagnostics* diag) {
  if (yhat.size() != y.size() || (!mask.empty() && mask.size() != static_cast<std::size_t>(y.size())))
    throw Error(ErrorCode::ShapeMismatch, "metrics: prediction, target and mask sizes differ");
  double mean = 0.0;
  std::size_t n = 0;
  for (Index i = 0; i < y.size(); ++i)
    if (mask.empty() || mask[static_cast<std::size_t>(i)]) {
      mean += y(i);
      ++n;
    }
  if (n == 0) throw Error(ErrorCode::EmptyMask, "metrics mask selects no node");
  mean /= static_cast<double>(n);
  double sq = 0.0, abs = 0.0, tot = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    if (!mask.empty() && !mask[static_cast<std::size_t>(i)]) continue;
    const double r = y(i) - yhat(i);
    sq += r * r;
    abs += std::abs(r);
    tot += (y(i) - mean) * (y(i) - mean);
  }
  Metrics m;
  m.rmse = std::sqrt(sq / static_cast<double>(n));
  m.mae = abs / static_cast<double>(n);
  if (tot > 0.0) {
    m.r2 = 1.0 - sq / tot;
  } else {
    m.r2 = std::numeric_limits<double>::quiet_NaN();
    warn(diag, "r2 undefined: target is constant over the evaluated nodes");
  }
  return m;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd s;
  if (values.empty()) return {std::nan(""), std::nan("")};
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

std::string format_mean_std(const MeanStd& s, int decimals) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.*f \xC2\xB1 %.*f", decimals, s.mean, decimals, s.std);
  return buf;
}

}  // namespace geohealth::cv
