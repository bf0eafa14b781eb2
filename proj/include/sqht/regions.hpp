#ifndef SQHT_REGIONS_HPP
#define SQHT_REGIONS_HPP

#include <string>
#include <vector>

#include "sqht/divergences.hpp"

namespace sqht {

enum class RegionKind { AdaptiveRectangle, NonadaptiveHull };

struct SupportLine {
  double t0 = 0.0;
  double t1 = 0.0;
  double g = 0.0;  // half-plane t0 R0 + t1 R1 <= g
};

struct RegionPolygon {
  RegionKind kind = RegionKind::AdaptiveRectangle;
  std::vector<Eigen::Vector2d> vertices;  // counterclockwise, nonnegative
  std::vector<SupportLine> supports;      // nonadaptive hull only
  double area() const;
};

struct BlockRates {
  int l = 1;
  double rate_01 = 0.0;     // measured relative entropy per sample, forward
  double rate_10 = 0.0;     // and reverse
  double ceiling_01 = 0.0;  // single-copy quantum relative entropies
  double ceiling_10 = 0.0;
};

// Rectangle with corner (D_M(rho1||rho0), D_M(rho0||rho1)).
RegionPolygon adaptive_region(const StatePair& pair, const OptimizerOptions& opts = {});

// Intersection of the nonnegative quadrant with the supporting half-planes
// t0 R0 + t1 R1 <= g(t0, t1) for angles uniform in (0, pi/2) plus the two
// axis-aligned supports.
RegionPolygon nonadaptive_region(const StatePair& pair, int n_angles,
                                 const OptimizerOptions& opts = {});

// Measured relative entropies of the l-fold tensor powers, per sample.
// Restarts are doubled for l >= 2 and the product of the single-copy optimal
// bases seeds the search.
BlockRates block_rates(const StatePair& pair, int l, const OptimizerOptions& opts = {});

struct SumRatePoint {
  double theta = 0.0;
  double f = 0.0;  // sum of the two measured relative entropies
  double g = 0.0;  // best single-measurement sum of both KLs
};

std::vector<SumRatePoint> sumrate_sweep(double r0, double r1,
                                        const std::vector<double>& theta_grid,
                                        const OptimizerOptions& opts = {});

// CSV serializations (12 significant digits).
std::string region_csv(const RegionPolygon& polygon);
std::string region_csv(const std::vector<RegionPolygon>& polygons);
std::string supports_csv(const RegionPolygon& polygon);
std::string sumrate_csv(const std::vector<SumRatePoint>& points);

}  // namespace sqht

#endif
