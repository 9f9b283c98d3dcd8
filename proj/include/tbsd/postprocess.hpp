#pragma once

// Closing detected defect pixels into filled regions, and pixelwise scoring.

#include "tbsd/common.hpp"

#include <cstdint>
#include <vector>

namespace tbsd {

struct DefectRegion {
  std::vector<Pixel> cluster;  // detected pixels of this cluster
  std::vector<Point2> knots;   // farthest pixel per angular sector
  std::vector<Point2> curve;   // closed polyline (first point not repeated)
  std::vector<Pixel> area;     // filled interior, row-major
};

// Clusters are connected components of the mask under Chebyshev dilation by
// d_max. Each cluster with >= 3 knots is closed by a periodic cubic spline
// through its knots (4 samples per knot interval) and filled by the even-odd
// rule. The area always contains the cluster's own pixels, and is just those
// pixels when fewer than 3 knots exist.
std::vector<DefectRegion> close_regions(const Mask& mask, int max_rotate, int d_max);

Mask regions_to_mask(const std::vector<DefectRegion>& regions, int rows, int cols);

struct MetricReport {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  double tpr = 0.0;  // 0 when there are no positives
  double fpr = 0.0;  // 0 when there are no negatives
};

MetricReport evaluate(const Mask& pred, const Mask& truth);

}  // namespace tbsd
