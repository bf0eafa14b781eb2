#include "sqht/regions.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace sqht {

namespace {

constexpr double kVertexMerge = 1e-12;

std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Sutherland-Hodgman clip of a convex polygon against t0 x + t1 y <= g.
std::vector<Eigen::Vector2d> clip_half_plane(const std::vector<Eigen::Vector2d>& poly,
                                             const SupportLine& line) {
  std::vector<Eigen::Vector2d> out;
  const std::size_t n = poly.size();
  auto inside = [&](const Eigen::Vector2d& p) {
    return line.t0 * p.x() + line.t1 * p.y() <= line.g + 1e-15;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& cur = poly[i];
    const Eigen::Vector2d& nxt = poly[(i + 1) % n];
    const bool cur_in = inside(cur);
    const bool nxt_in = inside(nxt);
    if (cur_in) out.push_back(cur);
    if (cur_in != nxt_in) {
      const double fc = line.t0 * cur.x() + line.t1 * cur.y() - line.g;
      const double fn = line.t0 * nxt.x() + line.t1 * nxt.y() - line.g;
      const double t = fc / (fc - fn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

std::vector<Eigen::Vector2d> merge_close_vertices(const std::vector<Eigen::Vector2d>& poly) {
  std::vector<Eigen::Vector2d> out;
  for (const Eigen::Vector2d& p : poly) {
    if (out.empty() || (out.back() - p).norm() > kVertexMerge) out.push_back(p);
  }
  if (out.size() > 1 && (out.front() - out.back()).norm() <= kVertexMerge) out.pop_back();
  return out;
}

}  // namespace

double RegionPolygon::area() const {
  if (vertices.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Eigen::Vector2d& p = vertices[i];
    const Eigen::Vector2d& q = vertices[(i + 1) % vertices.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

RegionPolygon adaptive_region(const StatePair& pair, const OptimizerOptions& opts) {
  const double r0_max = measured_relative_entropy(pair.swapped(), opts).value;
  const double r1_max = measured_relative_entropy(pair, opts).value;
  RegionPolygon region;
  region.kind = RegionKind::AdaptiveRectangle;
  region.vertices = {{0.0, 0.0}, {r0_max, 0.0}, {r0_max, r1_max}, {0.0, r1_max}};
  return region;
}

RegionPolygon nonadaptive_region(const StatePair& pair, int n_angles,
                                 const OptimizerOptions& opts) {
  if (n_angles < 8) throw Error(ErrorKind::OutOfRange, "need at least 8 angles");

  RegionPolygon region;
  region.kind = RegionKind::NonadaptiveHull;
  region.supports.push_back({1.0, 0.0, optimize_g(pair, 1.0, 0.0, opts).value});
  region.supports.push_back({0.0, 1.0, optimize_g(pair, 0.0, 1.0, opts).value});
  for (int i = 1; i <= n_angles; ++i) {
    const double angle = 0.5 * M_PI * static_cast<double>(i) /
                         static_cast<double>(n_angles + 1);
    const double t0 = std::cos(angle);
    const double t1 = std::sin(angle);
    region.supports.push_back({t0, t1, optimize_g(pair, t0, t1, opts).value});
  }

  bool degenerate = true;
  for (const SupportLine& s : region.supports)
    if (s.g > 1e-9) degenerate = false;
  if (degenerate) {
    region.vertices = {{0.0, 0.0}};
    return region;
  }

  const double r0_cap = region.supports[0].g;
  const double r1_cap = region.supports[1].g;
  std::vector<Eigen::Vector2d> poly = {
      {0.0, 0.0}, {r0_cap, 0.0}, {r0_cap, r1_cap}, {0.0, r1_cap}};
  for (std::size_t i = 2; i < region.supports.size(); ++i) {
    poly = clip_half_plane(poly, region.supports[i]);
    if (poly.empty()) break;
  }
  poly = merge_close_vertices(poly);
  if (poly.empty()) throw Error(ErrorKind::DegenerateRegion, "half-plane intersection vanished");
  region.vertices = std::move(poly);
  return region;
}

BlockRates block_rates(const StatePair& pair, int l, const OptimizerOptions& opts) {
  if (l < 1) throw Error(ErrorKind::OutOfRange, "block length must be >= 1");
  BlockRates rates;
  rates.l = l;
  rates.ceiling_01 = quantum_relative_entropy(pair);
  rates.ceiling_10 = quantum_relative_entropy(pair.swapped());

  if (l == 1) {
    rates.rate_01 = measured_relative_entropy(pair, opts).value;
    rates.rate_10 = measured_relative_entropy(pair.swapped(), opts).value;
    return rates;
  }

  StatePair powered(tensor_power(pair.rho0, l), tensor_power(pair.rho1, l), pair.label);
  OptimizerOptions block_opts = opts;
  block_opts.restarts = opts.restarts * 2;

  // The product of the single-copy optimal bases is feasible for the block
  // problem, so the per-sample rate can only improve on the single-copy one.
  auto seeded = [&](const StatePair& single, const StatePair& block) {
    const Cmat single_basis = measured_relative_entropy(single, opts).basis;
    Cmat product = single_basis;
    for (int i = 1; i < l; ++i)
      product = kron(product, single_basis, kDefaultDimensionCap);
    OptimizerOptions with_seed = block_opts;
    with_seed.warm_starts.push_back(product);
    return measured_relative_entropy(block, with_seed).value;
  };
  rates.rate_01 = seeded(pair, powered) / static_cast<double>(l);
  rates.rate_10 = seeded(pair.swapped(), powered.swapped()) / static_cast<double>(l);
  return rates;
}

std::vector<SumRatePoint> sumrate_sweep(double r0, double r1,
                                        const std::vector<double>& theta_grid,
                                        const OptimizerOptions& opts) {
  if (theta_grid.empty()) throw Error(ErrorKind::EmptyInput, "no theta values supplied");
  std::vector<SumRatePoint> points;
  points.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    const StatePair pair = qubit_family(r0, r1, theta);
    SumRatePoint point;
    point.theta = theta;
    point.f = measured_relative_entropy(pair.swapped(), opts).value +
              measured_relative_entropy(pair, opts).value;
    point.g = optimize_g(pair, 1.0, 1.0, opts).value;
    points.push_back(point);
  }
  return points;
}

std::string region_csv(const RegionPolygon& polygon) {
  return region_csv(std::vector<RegionPolygon>{polygon});
}

std::string region_csv(const std::vector<RegionPolygon>& polygons) {
  std::ostringstream os;
  os << "kind,vertex_index,r0,r1\n";
  for (const RegionPolygon& polygon : polygons) {
    const char* kind = polygon.kind == RegionKind::AdaptiveRectangle
                           ? "adaptive_rectangle"
                           : "nonadaptive_hull";
    for (std::size_t i = 0; i < polygon.vertices.size(); ++i)
      os << kind << ',' << i << ',' << format_g12(polygon.vertices[i].x()) << ','
         << format_g12(polygon.vertices[i].y()) << '\n';
  }
  return os.str();
}

std::string supports_csv(const RegionPolygon& polygon) {
  std::ostringstream os;
  os << "t0,t1,g\n";
  for (const SupportLine& s : polygon.supports)
    os << format_g12(s.t0) << ',' << format_g12(s.t1) << ',' << format_g12(s.g) << '\n';
  return os.str();
}

std::string sumrate_csv(const std::vector<SumRatePoint>& points) {
  std::ostringstream os;
  os << "theta,f,g\n";
  for (const SumRatePoint& p : points)
    os << format_g12(p.theta) << ',' << format_g12(p.f) << ',' << format_g12(p.g) << '\n';
  return os.str();
}

}  // namespace sqht
