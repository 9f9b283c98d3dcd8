#include "tbsd/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

namespace tbsd {

namespace {

// Chebyshev dilation as two separable running-window passes.
Mask dilate(const Mask& mask, int radius) {
  const int rows = static_cast<int>(mask.rows()), cols = static_cast<int>(mask.cols());
  Mask across = Mask::Constant(rows, cols, false);
  for (int r = 0; r < rows; ++r) {
    // Distance to the nearest set pixel on either side.
    int prev = -1000000000;
    for (int c = 0; c < cols; ++c) {
      if (mask(r, c)) prev = c;
      if (c - prev <= radius) across(r, c) = true;
    }
    int next = 1000000000;
    for (int c = cols - 1; c >= 0; --c) {
      if (mask(r, c)) next = c;
      if (next - c <= radius) across(r, c) = true;
    }
  }
  Mask out = Mask::Constant(rows, cols, false);
  for (int c = 0; c < cols; ++c) {
    int prev = -1000000000;
    for (int r = 0; r < rows; ++r) {
      if (across(r, c)) prev = r;
      if (r - prev <= radius) out(r, c) = true;
    }
    int next = 1000000000;
    for (int r = rows - 1; r >= 0; --r) {
      if (across(r, c)) next = r;
      if (next - r <= radius) out(r, c) = true;
    }
  }
  return out;
}

std::vector<std::vector<Pixel>> clusters(const Mask& mask, int d_max) {
  const int rows = static_cast<int>(mask.rows()), cols = static_cast<int>(mask.cols());
  const Mask grown = dilate(mask, d_max);
  Eigen::ArrayXXi label = Eigen::ArrayXXi::Constant(rows, cols, -1);
  std::vector<std::vector<Pixel>> out;
  std::deque<Pixel> queue;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (!mask(r, c) || label(r, c) >= 0) continue;
      const int id = static_cast<int>(out.size());
      out.emplace_back();
      label(r, c) = id;
      queue.push_back({r, c});
      while (!queue.empty()) {
        const Pixel p = queue.front();
        queue.pop_front();
        if (mask(p.row, p.col)) out[id].push_back(p);
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = p.row + dr, cc = p.col + dc;
            if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
            if (!grown(rr, cc) || label(rr, cc) >= 0) continue;
            label(rr, cc) = id;
            queue.push_back({rr, cc});
          }
      }
      std::sort(out[id].begin(), out[id].end(), [](const Pixel& a, const Pixel& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
      });
    }
  return out;
}

// Closed interpolating cubic spline with uniform parameterisation.
std::vector<Point2> periodic_spline(const std::vector<Point2>& knots, int samples_per_span) {
  const int n = static_cast<int>(knots.size());
  Matrix a = Matrix::Zero(n, n);
  Matrix rhs(n, 2);
  for (int i = 0; i < n; ++i) {
    const int prev = (i + n - 1) % n, next = (i + 1) % n;
    a(i, i) += 4.0;
    a(i, prev) += 1.0;
    a(i, next) += 1.0;
    rhs(i, 0) = 6.0 * (knots[next].x - 2.0 * knots[i].x + knots[prev].x);
    rhs(i, 1) = 6.0 * (knots[next].y - 2.0 * knots[i].y + knots[prev].y);
  }
  const Matrix m = a.partialPivLu().solve(rhs);
  std::vector<Point2> curve;
  curve.reserve(static_cast<std::size_t>(n) * samples_per_span);
  for (int i = 0; i < n; ++i) {
    const int next = (i + 1) % n;
    for (int k = 0; k < samples_per_span; ++k) {
      const double s = static_cast<double>(k) / samples_per_span, t = 1.0 - s;
      const double c0 = (t * t * t - t) / 6.0, c1 = (s * s * s - s) / 6.0;
      curve.push_back({t * knots[i].x + s * knots[next].x + c0 * m(i, 0) + c1 * m(next, 0),
                       t * knots[i].y + s * knots[next].y + c0 * m(i, 1) + c1 * m(next, 1)});
    }
  }
  return curve;
}

bool inside(const std::vector<Point2>& poly, double x, double y) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = poly[i];
    const Point2& b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

}  // namespace

std::vector<DefectRegion> close_regions(const Mask& mask, int max_rotate, int d_max) {
  require(max_rotate >= 8, "close_regions: max_rotate must be >= 8");
  require(d_max >= 1, "close_regions: d_max must be >= 1");
  const int rows = static_cast<int>(mask.rows()), cols = static_cast<int>(mask.cols());
  const double sector = 2.0 * std::numbers::pi / max_rotate;

  std::vector<DefectRegion> regions;
  for (auto& cluster : clusters(mask, d_max)) {
    DefectRegion region;
    double cx = 0.0, cy = 0.0;
    for (const Pixel& p : cluster) {
      cx += p.col;
      cy += p.row;
    }
    cx /= static_cast<double>(cluster.size());
    cy /= static_cast<double>(cluster.size());

    std::vector<double> best(max_rotate, -1.0);
    std::vector<Pixel> farthest(max_rotate);
    for (const Pixel& p : cluster) {
      const double dx = p.col - cx, dy = p.row - cy;
      double angle = std::atan2(-dy, dx);
      if (angle < 0) angle += 2.0 * std::numbers::pi;
      const int k = std::min(max_rotate - 1, static_cast<int>(angle / sector));
      const double dist = std::hypot(dx, dy);
      if (dist > best[k]) {
        best[k] = dist;
        farthest[k] = p;
      }
    }
    for (int k = 0; k < max_rotate; ++k) {
      if (best[k] < 0.0) continue;
      // Knots sit on the outer edge of the boundary pixel rather than its centre.
      const double dx = farthest[k].col - cx, dy = farthest[k].row - cy;
      const double dist = best[k];
      const double push = dist > 0.0 ? 0.5 / dist : 0.0;
      region.knots.push_back({farthest[k].col + dx * push, farthest[k].row + dy * push});
    }

    int r_lo = rows, r_hi = -1, c_lo = cols, c_hi = -1;
    for (const Pixel& p : cluster) {
      r_lo = std::min(r_lo, p.row);
      r_hi = std::max(r_hi, p.row);
      c_lo = std::min(c_lo, p.col);
      c_hi = std::max(c_hi, p.col);
    }
    if (region.knots.size() >= 3) {
      region.curve = periodic_spline(region.knots, 4);
      for (const Point2& q : region.curve) {
        r_lo = std::min(r_lo, static_cast<int>(std::floor(q.y)));
        r_hi = std::max(r_hi, static_cast<int>(std::ceil(q.y)));
        c_lo = std::min(c_lo, static_cast<int>(std::floor(q.x)));
        c_hi = std::max(c_hi, static_cast<int>(std::ceil(q.x)));
      }
      r_lo = std::max(r_lo, 0);
      r_hi = std::min(r_hi, rows - 1);
      c_lo = std::max(c_lo, 0);
      c_hi = std::min(c_hi, cols - 1);
    }
    // The filled area always keeps the detected pixels themselves.
    const int h = r_hi - r_lo + 1, w = c_hi - c_lo + 1;
    Mask filled = Mask::Constant(h, w, false);
    for (const Pixel& p : cluster) filled(p.row - r_lo, p.col - c_lo) = true;
    if (!region.curve.empty())
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
          if (inside(region.curve, c + c_lo, r + r_lo)) filled(r, c) = true;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (filled(r, c)) region.area.push_back({r + r_lo, c + c_lo});
    region.cluster = std::move(cluster);
    regions.push_back(std::move(region));
  }
  return regions;
}

Mask regions_to_mask(const std::vector<DefectRegion>& regions, int rows, int cols) {
  Mask out = Mask::Constant(rows, cols, false);
  for (const auto& region : regions)
    for (const Pixel& p : region.area) {
      require(p.row >= 0 && p.row < rows && p.col >= 0 && p.col < cols,
              "regions_to_mask: region outside the image");
      out(p.row, p.col) = true;
    }
  return out;
}

MetricReport evaluate(const Mask& pred, const Mask& truth) {
  require(pred.rows() == truth.rows() && pred.cols() == truth.cols(),
          "evaluate: mask dimensions differ");
  MetricReport m;
  for (Eigen::Index k = 0; k < pred.size(); ++k) {
    const bool p = pred.data()[k], t = truth.data()[k];
    if (p && t) ++m.tp;
    else if (p) ++m.fp;
    else if (t) ++m.fn;
    else ++m.tn;
  }
  if (m.tp + m.fn > 0) m.tpr = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  if (m.fp + m.tn > 0) m.fpr = static_cast<double>(m.fp) / static_cast<double>(m.fp + m.tn);
  return m;
}

}  // namespace tbsd
