#include "pforge/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pforge/rng.hpp"

namespace pforge {
namespace {

struct Run {
  std::vector<int> assign;
  std::vector<double> centroids;
  std::vector<double> history;
  int iterations = 0;
  double sse = 0.0;
};

int nearest(double x, const std::vector<double>& c) {
  int best = 0;
  double bd = std::fabs(x - c[0]);
  for (int j = 1; j < static_cast<int>(c.size()); ++j) {
    const double d = std::fabs(x - c[j]);
    if (d < bd) {
      bd = d;
      best = j;
    }
  }
  return best;
}

std::vector<double> seed_plus_plus(const std::vector<double>& x, int k, Rng& rng) {
  std::vector<double> c{x[rng.below(x.size())]};
  std::vector<double> d2(x.size());
  while (static_cast<int>(c.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - c[nearest(x[i], c)];
      d2[i] = d * d;
      total += d2[i];
    }
    if (total == 0.0) {
      c.push_back(x[rng.below(x.size())]);
      continue;
    }
    const double r = rng.uniform01() * total;
    double acc = 0.0;
    std::size_t pick = x.size() - 1;
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc += d2[i];
      if (r < acc && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
    while (d2[pick] == 0.0) --pick;
    c.push_back(x[pick]);
  }
  return c;
}

/// Moves the point farthest from its centroid into each empty cluster.
void repair_empty(const std::vector<double>& x, std::vector<int>& assign, std::vector<double>& c) {
  const int k = static_cast<int>(c.size());
  for (int j = 0; j < k; ++j) {
    std::vector<int> counts(k, 0);
    for (int a : assign) ++counts[a];
    if (counts[j] > 0) continue;
    double far = 0.0;
    int who = -1;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (counts[assign[i]] < 2) continue;
      const double d = std::fabs(x[i] - c[assign[i]]);
      if (d > far) {
        far = d;
        who = static_cast<int>(i);
      }
    }
    if (who < 0) continue;
    assign[who] = j;
    c[j] = x[who];
  }
}

void update_centroids(const std::vector<double>& x, const std::vector<int>& assign,
                      std::vector<double>& c) {
  std::vector<double> sum(c.size(), 0.0);
  std::vector<int> n(c.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum[assign[i]] += x[i];
    ++n[assign[i]];
  }
  for (std::size_t j = 0; j < c.size(); ++j)
    if (n[j] > 0) c[j] = sum[j] / n[j];
}

Run lloyd(const std::vector<double>& x, std::vector<double> c, const KMeansParams& p) {
  Run run;
  run.assign.assign(x.size(), 0);
  for (int it = 0; it < p.max_iter; ++it) {
    for (std::size_t i = 0; i < x.size(); ++i) run.assign[i] = nearest(x[i], c);
    repair_empty(x, run.assign, c);
    const std::vector<double> before = c;
    update_centroids(x, run.assign, c);
    run.history.push_back(partition_sse(x, run.assign));
    run.iterations = it + 1;
    double moved = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) moved = std::max(moved, std::fabs(c[j] - before[j]));
    if (moved < p.tol) break;
  }
  run.centroids = c;
  run.sse = run.history.back();
  return run;
}

}  // namespace

double size_feature(const RealDims& d) {
  if (!(d.width_m > 0 && d.height_m > 0 && d.depth_m > 0))
    throw InvariantError("real dimensions must be positive");
  return std::log(std::sqrt(d.width_m * d.width_m + d.height_m * d.height_m + d.depth_m * d.depth_m));
}

double partition_sse(const std::vector<double>& values, const std::vector<int>& assignments) {
  if (values.size() != assignments.size()) throw InvariantError("assignment length mismatch");
  const int k = assignments.empty() ? 0 : *std::max_element(assignments.begin(), assignments.end()) + 1;
  std::vector<double> sum(k, 0.0);
  std::vector<int> n(k, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum[assignments[i]] += values[i];
    ++n[assignments[i]];
  }
  double sse = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - sum[assignments[i]] / n[assignments[i]];
    sse += d * d;
  }
  return sse;
}

KMeansResult kmeans_sizes(const std::vector<SizeRecord>& records, std::uint64_t seed,
                          const KMeansParams& p) {
  if (p.k < 1) throw InvariantError("k must be ≥ 1");
  if (static_cast<int>(records.size()) < p.k)
    throw InvariantError("kmeans needs at least k=" + std::to_string(p.k) + " records, got " +
                         std::to_string(records.size()));
  if (p.n_init < 1 || p.max_iter < 1) throw InvariantError("kmeans needs n_init, max_iter ≥ 1");
  std::vector<double> x;
  for (const auto& r : records) {
    if (!std::isfinite(r.feature)) throw InvariantError("size feature of '" + r.object_id + "' is not finite");
    x.push_back(r.feature);
  }

  Run best;
  best.sse = std::numeric_limits<double>::infinity();
  for (int r = 0; r < p.n_init; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    Run run = lloyd(x, seed_plus_plus(x, p.k, rng), p);
    if (run.sse < best.sse) best = std::move(run);
  }
  return {best.assign, best.centroids, best.sse, best.history, best.iterations};
}

SideBySideScale relative_scale(const std::array<const ObjectAsset*, 2>& pair,
                               const std::array<Size, 2>& cutouts, Size canvas, double margin_frac) {
  if (!(margin_frac >= 0.0 && margin_frac < 0.5)) throw InvariantError("margin must be in [0,0.5)");
  double width_sum = 0.0, max_h = 0.0;
  std::array<double, 2> real{};
  for (int i = 0; i < 2; ++i) {
    if (!pair[i] || !pair[i]->real_dims)
      throw InvariantError("side-by-side object lacks real_dims");
    if (cutouts[i].width <= 0 || cutouts[i].height <= 0) throw InvariantError("empty cutout");
    real[i] = pair[i]->real_dims->height_m;
    if (!(real[i] > 0)) throw InvariantError("real height must be positive");
    const double aspect = static_cast<double>(cutouts[i].width) / cutouts[i].height;
    width_sum += real[i] * aspect;
    max_h = std::max(max_h, real[i]);
  }
  const double c = std::min(canvas.width * (1.0 - 2.0 * margin_frac) / width_sum,
                            canvas.height * (1.0 - 2.0 * margin_frac) / max_h);
  SideBySideScale s;
  for (int i = 0; i < 2; ++i) {
    s.pixel_heights[i] = c * real[i];
    s.scales[i] = s.pixel_heights[i] / cutouts[i].height;
  }
  return s;
}

std::array<Vec2, 2> side_by_side_centers(const SideBySideScale& s, const std::array<Size, 2>& cutouts,
                                         Size canvas, double margin_frac) {
  const double inner = canvas.width * (1.0 - 2.0 * margin_frac);
  const double w0 = cutouts[0].width * s.scales[0];
  const double w1 = cutouts[1].width * s.scales[1];
  const double gap = (inner - w0 - w1) / 3.0;
  const double left = canvas.width * margin_frac;
  const double base = canvas.height * (1.0 - margin_frac);
  return {Vec2{left + gap + w0 / 2.0, base - s.pixel_heights[0] / 2.0},
          Vec2{left + 2.0 * gap + w0 + w1 / 2.0, base - s.pixel_heights[1] / 2.0}};
}

}  // namespace pforge
