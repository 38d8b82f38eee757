#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "wavegreen/pdo.hpp"
#include "wavegreen/rays.hpp"

// Leading-order outgoing field of (Op(L0) - E - i0) u = f for a localized
// semiclassical source, assembled from a Lagrangian ray fan as
//   u = term1 (non-characteristic momentum band)
//     + term2 (WKB flow-out sum over ray branches)
//     + term3 (transitional short-time part near the source),
// verified against the exact constant-depth resolvent kernel and against
// direct resolvent solves with decreasing absorption.

namespace wgf::greenfn {

using pdo::cdouble;

/// Localized source f(x) = i (2 pi h)^{-1} \int e^{i p.(x-x0)/h} A(|p|) d^2p
/// with A a smooth radial amplitude supported on [Pmin, Pmax]; ||f||_2 is
/// h-independent for fixed A.
struct SourceModel {
  Vec2 x0;
  double E;
  double h;
  double Pmin, Pmax;                 // support of A
  std::function<double(double)> A;   // radial momentum amplitude
  double normalization = 1.0;

  /// Smooth bump on the annulus |p| in r(x0,E) * [1-w, 1+w], peak 1 at r.
  static SourceModel annular(const DepthProfile& prof, const Vec2& x0, double E,
                             double h, double rel_width = 0.6);
};

struct Cutoffs {
  double rho_plateau = 0.30;  // rho == 1 within this relative band around r
  double rho_taper = 0.15;    // additional relative width where rho falls to 0
  double t0 = 0.0;            // short-time cutoff (physical time); 0 = auto
  double j_min_rel = 1e-3;    // caustic exclusion threshold on |J| / max |J|
  cdouble kappa = 1.0;        // canonical-operator calibration constant
};

struct GreenField {
  pdo::Grid2 grid;
  Eigen::MatrixXcd u;
  double E, h, eps;
  Cutoffs cutoffs;
  double t0_used;
  Eigen::MatrixXi branch_count;  // WKB branches per node (0 = shadow)
  Eigen::MatrixXi caustic_flag;  // 1 = within j_min of a caustic; exclude from norms
};

/// Synthesizes the source samples on the grid (radial momentum quadrature).
pdo::GridField2 source_field(const SourceModel& model, const pdo::Grid2& grid);

/// Exact outgoing field for constant depth by radial quadrature of
/// i/h \int A(P) P J0(P R / h) / (L0(P) - E - i eps) dP with principal-value
/// pole treatment at eps = 0.  Self-checked to 1e-6 relative.
std::vector<cdouble> exact_green_constant_depth(double D0, const SourceModel& model,
                                                double eps,
                                                const std::vector<Vec2>& points);

/// Assembles the three-term field from a fan launched with the 1-homogeneous
/// normal form at the source (fan.kind must be Finsler, fan.E == model.E).
GreenField assemble_green(const DepthProfile& prof, const rays::LagrangianFan& fan,
                          const SourceModel& model, const pdo::Grid2& obs,
                          const Cutoffs& cutoffs = {});

/// Fits the canonical-operator constant on constant depth D0 by comparing the
/// assembled field (kappa = 1) with the exact kernel on the annulus
/// 1.5 <= |x - x0| <= 2.5.  The result must come out h-independent.
cdouble calibrate_constant(double D0, const SourceModel& model);

struct AbsorptionStudy {
  std::vector<double> eps;
  std::vector<double> cauchy;  // weighted norms of successive differences
  bool monotone;
  pdo::GridField2 final_field;   // u at the last (smallest) eps
  pdo::GridField2 extrapolated;  // 2 u_last - u_prev, one Richardson step to eps = 0
  double oracle_dev;  // constant depth: weighted annulus deviation of the final
                      // field vs the exact kernel at the same eps; else -1
};

/// Resolvent solves along a decreasing absorption schedule; Cauchy differences
/// in the <x>^{-1}-weighted norm certify the limiting-absorption limit.  The
/// smallest usable eps on the periodic box is ~ (group speed) * h / X: below
/// that the absorption length exceeds the box and wrapped energy recirculates.
AbsorptionStudy limiting_absorption_study(const DepthProfile& prof,
                                          const SourceModel& model,
                                          const std::vector<double>& eps_schedule,
                                          const pdo::Grid2& grid);

/// Surface response to a bottom disturbance:
/// u = (Op(L0) - E - i eps)^{-1} Op(Q0) f_minus.
pdo::GridField2 bottom_to_surface_response(const DepthProfile& prof,
                                           const pdo::GridField2& f_minus,
                                           double E, double eps);

}  // namespace wgf::greenfn
