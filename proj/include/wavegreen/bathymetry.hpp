#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace wgf {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Thrown when a profile is evaluated outside its declared box.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Thrown when interpolated or constructed data violates an invariant
/// (e.g. nonpositive depth).
struct ValidityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ProfileKind { Constant, RadialBump, SechTrench, Gridded };

/// Bathymetry field D(x) on R^2.  Analytic families:
///   constant     D(x) = D0
///   radial-bump  D(x) = D0 - delta * exp(-|x-c|^2 / ell^2)
///   sech-trench  D(x) = D0 - delta * sech^2((x2-c2)/ell)   (delta>0: shallow ridge)
/// Gridded profiles interpolate node samples with tensor-product cubics (C^1).
/// Immutable after construction; safe for concurrent reads.
class DepthProfile {
 public:
  static DepthProfile constant(double D0);
  static DepthProfile radial_bump(double D0, double delta, double ell,
                                  Vec2 center = Vec2::Zero());
  static DepthProfile sech_trench(double D0, double delta, double ell,
                                  Vec2 center = Vec2::Zero());
  /// Uniform-grid samples; node (i,j) sits at (x0 + i*dx, y0 + j*dy).
  static DepthProfile gridded(Eigen::MatrixXd samples, double x0, double y0,
                              double dx, double dy, double D0);
  /// CSV rows "x,y,depth" on a complete uniform grid.
  static DepthProfile from_csv(const std::string& path, double D0);
  /// Raw little-endian float64 array with JSON sidecar {nx,ny,x0,y0,dx,dy,D0}.
  static DepthProfile from_raster(const std::string& raw_path,
                                  const std::string& json_path);

  double depth(const Vec2& x) const;
  Vec2 grad_depth(const Vec2& x) const;
  Mat2 hess_depth(const Vec2& x) const;

  ProfileKind kind() const { return kind_; }
  double D0() const { return D0_; }
  double d_min() const { return d_min_; }
  bool is_constant() const { return kind_ == ProfileKind::Constant; }
  /// Depth range attained over a box (sampled); used by table-based operators.
  std::pair<double, double> depth_range(double box_halfwidth, int n = 64) const;

  /// Evaluation box for gridded profiles (hull of nodes minus one cell).
  /// Analytic kinds return an unbounded box.
  struct Box {
    double xlo, xhi, ylo, yhi;
    bool contains(const Vec2& x) const {
      return x[0] >= xlo && x[0] <= xhi && x[1] >= ylo && x[1] <= yhi;
    }
  };
  const Box& eval_box() const { return box_; }

  struct FlatnessRow {
    double radius;
    double sup_dev;    // sup |D - D0| on the circle
    double sup_grad;   // sup |grad D|
    double sup_hess;   // sup |hess D|
    bool weighted_ok;  // <r>^{|a|+rho} * sup bounded by the innermost radius value
  };
  struct FlatnessReport {
    std::vector<FlatnessRow> rows;
    double rho_hat;       // fitted decay exponent of sup|D-D0| vs radius
    double declared_rho;
    bool long_range_ok;   // declared-rate weighted sups nonincreasing
  };
  /// Decay of D toward D0 on circles |x - c| = r; needs >= 3 radii.
  FlatnessReport flatness_report(const std::vector<double>& radii,
                                 double declared_rho = 1.0) const;

 private:
  DepthProfile() = default;
  void validate(double d, const Vec2& x) const;

  ProfileKind kind_ = ProfileKind::Constant;
  double D0_ = 1.0;
  double delta_ = 0.0, ell_ = 1.0;
  Vec2 center_ = Vec2::Zero();
  double d_min_ = 0.0;
  Box box_{-1e300, 1e300, -1e300, 1e300};
  // gridded payload
  Eigen::MatrixXd grid_;  // grid_(i,j) = D(x0+i*dx, y0+j*dy)
  double gx0_ = 0, gy0_ = 0, gdx_ = 1, gdy_ = 1;
};

}  // namespace wgf
