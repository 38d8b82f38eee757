#pragma once

#include <vector>

#include "wavegreen/bathymetry.hpp"
#include "wavegreen/dispersion.hpp"

// Hamiltonian ray flow for the three time-reparametrization-equivalent
// Hamiltonians on the energy shell L0 = E:
//   surface symbol   H = |p| tanh(D(x) |p|)
//   finsler          H = g(x,E) |p|        (g = 1/r, 1-homogeneous in p)
//   schrodinger      H = |p|^2 - V(x,E)    (V = r^2)
// with action, variational (monodromy) matrix, transverse fan spreading,
// caustic/Maslov bookkeeping and nontrapping diagnostics.

namespace wgf::rays {

using dispersion::PhasePoint;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

enum class HamiltonianKind { SurfaceSymbol, Finsler, Schrodinger };

struct Hamiltonian {
  HamiltonianKind kind;
  double E = 1.0;  // used by finsler/schrodinger (and fan launches)

  static Hamiltonian surface() { return {HamiltonianKind::SurfaceSymbol, 1.0}; }
  static Hamiltonian finsler(double E) { return {HamiltonianKind::Finsler, E}; }
  static Hamiltonian schrodinger(double E) { return {HamiltonianKind::Schrodinger, E}; }

  double value(const DepthProfile& prof, const PhasePoint& pt) const;
  /// Hamiltonian vector field (dx/dt, dp/dt) at z = (x, p).
  Vec4 field(const DepthProfile& prof, const Vec4& z) const;
};

struct RayState {
  Vec2 x, p;
  double t;
  double S;       // accumulated action  int p . dx
  Mat4 M;         // variational matrix d(x,p)/d(x0,p0)
  int maslov;     // sign changes of J so far (fan rays; 0 otherwise)
  double J;       // transverse spreading det[dx/dt, dx/dtheta] (fan rays)
};

struct Trajectory {
  std::vector<RayState> states;  // at t = 0, dt, 2dt, ...
  double dt;
  bool truncated;       // left the profile's evaluation box before T
  double energy_drift;  // max |H - H0| along the way

  const RayState& back() const { return states.back(); }
  /// Dense output by cubic Hermite interpolation between stored steps
  /// (positions/momenta/action; M, J by linear interpolation).
  RayState at_time(double t) const;
};

/// Fixed-step RK4 integration of the ray, action, and variational matrix
/// (the field Jacobian is taken by central differences of the analytic
/// Hamiltonian field).  T may be negative.
Trajectory flow(const DepthProfile& prof, const Hamiltonian& ham,
                const PhasePoint& initial, double T, double dt);

struct OverlapReport {
  double d_surface_finsler;
  double d_surface_schrodinger;
  double d_finsler_schrodinger;
  bool shell_ok;          // initial data on the shared energy shell
  double shell_mismatch;  // worst relative deviation among the three shells
};

/// Integrates all three flows from the same initial point for time T (each in
/// its own clock), resamples each position curve by arclength and returns the
/// pairwise Hausdorff distances.
OverlapReport maupertuis_overlap(const DepthProfile& prof, double E,
                                 const PhasePoint& initial, double T, double dt);

struct FanRay {
  double theta;
  Trajectory traj;                  // states carry J and the Maslov counter
  std::vector<double> caustic_times;  // refined simple zeros of J
};

struct LagrangianFan {
  Vec2 x0;
  double E;
  HamiltonianKind kind;
  double r0;  // launch momentum radius r(x0, E)
  std::vector<FanRay> rays;
};

/// Rays from x0 with |p| = r(x0,E) at n_angles uniform angles.  J is seeded
/// from the variational matrix applied to the launch variation
/// dp0/dtheta = r0 (-sin, cos).
LagrangianFan launch_fan(const DepthProfile& prof, const Vec2& x0, double E,
                         int n_angles, double T, double dt,
                         const Hamiltonian& ham);

struct EscapeRecord {
  PhasePoint launch;
  bool escaped;
  double escape_time;  // min over the two time directions (if escaped)
};

struct NontrappingReport {
  bool pass;
  double slowest_escape;  // max over launches of the per-launch escape time
  std::vector<EscapeRecord> records;
};

/// Every launch must reach |x| >= R_escape before T_max in at least one time
/// direction under the surface-symbol flow.
NontrappingReport nontrapping_check(const DepthProfile& prof, double E,
                                    const std::vector<PhasePoint>& launches,
                                    double T_max, double R_escape, double dt);

}  // namespace wgf::rays
