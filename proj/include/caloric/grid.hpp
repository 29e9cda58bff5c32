#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "caloric/hyperbolic.hpp"

namespace caloric {

using Point2 = std::array<double, 2>;

// Node-centred square grid: cell (ix, iy) sits at ((ix - n/2) h, (iy - n/2) h),
// so the origin is the node n/2 and dilations by 2 map nodes to nodes.
struct GridSpec {
  int n = 0;
  double h = 0.0;
  int margin = 2;

  static GridSpec make(int n, double half_width, int margin = 2);
  void validate() const;
  double half_width() const { return 0.5 * n * h; }
  double coord(int i) const { return (i - n / 2) * h; }
  int cells() const { return n * n; }
  int index(int ix, int iy) const { return iy * n + ix; }
  bool in_margin(int ix, int iy) const {
    return ix < margin || iy < margin || ix >= n - margin || iy >= n - margin;
  }
  bool operator==(const GridSpec& o) const { return n == o.n && h == o.h && margin == o.margin; }
};

// Per-cell array of (m+1)-vectors, row-major (iy outer).
class CellVectors {
 public:
  CellVectors() = default;
  CellVectors(const GridSpec& g, int m) : grid_(g), m_(m), values_(static_cast<size_t>(g.cells()) * (m + 1), 0.0) {}

  const GridSpec& grid() const { return grid_; }
  int m() const { return m_; }
  int dim() const { return m_ + 1; }
  double* at(int idx) { return values_.data() + static_cast<size_t>(idx) * (m_ + 1); }
  const double* at(int idx) const { return values_.data() + static_cast<size_t>(idx) * (m_ + 1); }
  double* at(int ix, int iy) { return at(grid_.index(ix, iy)); }
  const double* at(int ix, int iy) const { return at(grid_.index(ix, iy)); }
  Vec& raw() { return values_; }
  const Vec& raw() const { return values_; }

 protected:
  GridSpec grid_;
  int m_ = 0;
  Vec values_;
};

class MapField : public CellVectors {
 public:
  MapField() = default;
  // Constant map equal to base.
  MapField(const GridSpec& g, const HyperbolicPoint& base);

  const HyperbolicPoint& base() const { return base_; }
  HyperbolicPoint point(int ix, int iy) const;
  // Sheet invariant everywhere and exact base values on the margin ring.
  void validate(double tol = 1e-10) const;

 private:
  HyperbolicPoint base_ = HyperbolicPoint::basepoint(1);
};

class TangentField : public CellVectors {
 public:
  TangentField() = default;
  TangentField(const GridSpec& g, int m) : CellVectors(g, m) {}
};

struct DataPair {
  MapField phi0;
  TangentField phi1;

  static DataPair constant(const GridSpec& g, const HyperbolicPoint& base);
  void validate(double tol = 1e-10) const;
};

struct EnergyDensityField {
  GridSpec grid;
  Vec t00;
  double total() const;
};

// Per-cell Dirichlet density: sum over the four neighbours of d(x,y)^2 / (4 h^2).
// Each edge is shared by its two cells, so the sum is the edge-based Dirichlet energy.
Vec dirichlet_density(const MapField& phi);
double dirichlet_energy(const MapField& phi);

EnergyDensityField energy_density(const DataPair& d);
double total_energy(const DataPair& d);
double local_energy(const EnergyDensityField& e, const Point2& x0, double r);

DataPair sym_translate(const DataPair& d, const Point2& x0);
DataPair sym_time_reverse(const DataPair& d);
DataPair sym_rotate(const DataPair& d, const LorentzRotation& U);
DataPair sym_dilate(const DataPair& d, double lambda);

// Scalar profiles on R^2.
using Profile = std::function<double(double, double)>;
Profile zero_profile();
// A exp(-r^2 / 2 sigma^2), smoothly cut off between 5 sigma and 7 sigma so that it is compactly supported.
Profile gaussian_profile(double amplitude, double sigma, const Point2& center = {0.0, 0.0});
// A exp(1 - 1 / (1 - (r/R)^2)) for r < R, zero outside.
Profile compact_bump_profile(double amplitude, double radius, const Point2& center = {0.0, 0.0});
// Sampled profile with the margin ring forced to zero; throws SupportError if it is not already negligible there.
Vec sample_profile(const GridSpec& g, const Profile& u);

// phi0 = exp(base, u0 e1), phi1 = u1 * (e1 transported to phi0); e1 tangent at base.
DataPair make_geodesic_data(const GridSpec& g, const HyperbolicPoint& base, const Vec& e1, const Profile& u0,
                            const Profile& u1);
DataPair make_geodesic_data(const GridSpec& g, const HyperbolicPoint& base, const Vec& e1, const Vec& u0,
                            const Vec& u1);

struct Bump {
  Point2 center{0.0, 0.0};
  double scale = 1.0;
  double amplitude = 1.0;
  Vec direction;           // tangent at base
  double velocity = 0.0;   // amplitude of the phi1 profile
  Vec velocity_direction;  // tangent at base; defaults to direction
  bool compact = false;    // compact bump of radius 'scale' instead of a Gaussian
};

struct MultibumpData {
  DataPair data;
  std::vector<std::string> warnings;
};

MultibumpData make_multibump_data(const GridSpec& g, const HyperbolicPoint& base, const std::vector<Bump>& bumps);

// Unit tangent at base along the projection of the given spatial direction (length m).
Vec base_direction(const HyperbolicPoint& base, const Vec& spatial);

}  // namespace caloric
