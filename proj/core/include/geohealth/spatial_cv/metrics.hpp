#pragma once

#include <string>
#include <vector>

#include "geohealth/error.hpp"
#include "geohealth/types.hpp"

namespace geohealth::cv {

struct Metrics {
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;  ///< NaN when y is constant over the mask
};

/// Metrics over masked entries; an empty `mask` means every entry.
Metrics compute_metrics(const Vector& yhat, const Vector& y, const Mask& mask = {}, Diagnostics* diag = nullptr);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
};

MeanStd mean_std(const std::vector<double>& values);

/// "0.915 ± 0.010"
std::string format_mean_std(const MeanStd& s, int decimals = 3);

}  // namespace geohealth::cv
