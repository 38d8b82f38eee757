#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "wavegreen/bathymetry.hpp"
#include "wavegreen/dispersion.hpp"

// Brute-force reference solver for the mixed boundary-value problems on the
// fluid strip -D(x) < z < 0:
//
//   -h^2 Laplace_x Phi - d_z^2 Phi = f,
//
// with Dirichlet data at the top and Neumann data at the bottom (or the twin
// assignment), discretized in terrain-following coordinates sigma = z / D(x)
// on a periodic horizontal box.  Used to extract discrete surface/bottom
// response matrices and to certify the symbol layer against them.
//
// Trace conventions:
//   phi+ = Phi|_{z=0}           psi+ = d_z Phi|_{z=0}
//   phi- = Phi|_{z=-D}          psi- = -(d_z Phi + h^2 <grad D, grad_x Phi>)|_{z=-D}
// psi- uses the outward conormal (pointing out of the fluid), which is the
// sign that makes the response matrices satisfy L21^* = -L12.

namespace wgf::strip {

/// Horizontal box [-X,X] per axis (periodic), nx x ny horizontal nodes and nz
/// vertical nodes on sigma in [-1, 0].  ny = 1 selects the reduced problem
/// with one horizontal dimension (profile restricted to the line x2 = 0).
struct StripGrid {
  double X;
  int nx;
  int ny;
  int nz;

  StripGrid(double X_, int nx_, int ny_, int nz_);
  double dx() const { return 2.0 * X / nx; }
  double dy() const { return 2.0 * X / ny; }
  double dsigma() const { return 1.0 / (nz - 1); }
  double xat(int i) const { return -X + i * dx(); }
  double yat(int j) const { return ny == 1 ? 0.0 : -X + j * dy(); }
  double sigat(int k) const { return -1.0 + k * dsigma(); }
  bool reduced() const { return ny == 1; }
  int nboundary() const { return nx * ny; }
};

enum class TopCondition { Dirichlet, Neumann };

/// Boundary data sampled on the nx x ny horizontal grid plus an interior
/// source f(x, z).  For TopCondition::Dirichlet, top = phi+ and
/// bottom = psi-; for Neumann, top = psi+ and bottom = phi-.
struct StripData {
  Eigen::MatrixXd top;
  Eigen::MatrixXd bottom;
  std::function<double(const Vec2&, double)> f;  // optional, default 0
};

struct StripSolution {
  StripGrid grid;
  double h;
  std::vector<Eigen::MatrixXd> levels;  // levels[k](i,j) = Phi at sigma_k
  Eigen::MatrixXd phi_plus, psi_plus, phi_minus, psi_minus;
  double interior_residual;   // max-norm residual of the discrete equations
  bool resolution_warning;    // boundary data under-resolved (< 8 nodes/wavelength)
};

/// Direct sparse solve of the mixed problem.  Throws on a singular discrete
/// system; an under-resolved wavelength only sets the warning flag.
StripSolution solve_mixed(const DepthProfile& prof, const StripGrid& grid,
                          double h, const StripData& data, TopCondition which);

/// Discrete boundary response: (phi+, psi-) -> (psi+, phi-) in the delta
/// basis of horizontal grid samples.
struct DtNMatrices {
  Eigen::MatrixXd L11, L12, L21, L22;
  StripGrid grid;
  double h;
  std::string basis;  // "delta"
};

/// Columns assembled by solving the Dirichlet-top problem with unit boundary
/// samples; one factorization, 2 nx ny back-substitutions.  Capped at 128
/// nodes per horizontal axis.
DtNMatrices assemble_dtn(const DepthProfile& prof, const StripGrid& grid, double h);

struct AdjointnessReport {
  double r11;  // ||L11 - L11*|| / ||L11||
  double r22;  // ||L22 - L22*|| / ||L22||
  double r12;  // ||L21* + L12|| / ||L12||
  bool pass;   // all ratios <= 5e-2
};

/// Deviation from the self-adjointness relations in the weighted pairing
/// <a,b> = sum_i w_i a_i b_i; weights must be positive.
AdjointnessReport adjointness_report(const DtNMatrices& mats,
                                     const Eigen::VectorXd& weights);

struct ResidualStudyOptions {
  double X = 8.0;
  int nx = 256;                    // minimum base horizontal resolution
  int nz = 48;                     // base vertical resolution
  double p0 = 1.0;                 // carrier momentum of the test data
  int points_per_wavelength = 16;  // base resolution of the carrier
};

struct ResidualStudy {
  std::vector<double> hs;
  std::vector<double> residuals;  // r(h), Richardson-corrected
  std::vector<bool> in_fit;       // monotone range used for the slope fit
  double slope;                   // of log r vs log h
  bool monotone;                  // false if the discretization floor was hit
};

/// Reduced (1-D horizontal) comparison of the brute-force surface response
/// with the quantized principal symbol on the coherent data
/// u_h(x) = phi(x) cos(p0 x / h), which keeps the momentum content at the
/// O(1) carrier p0 for every h.  For each h computes
/// r(h) = ||L11 u_h - Op(L0) u_h|| / ||u_h|| after one Richardson step across
/// a simultaneous (nx, nz) doubling, then fits the slope of log r vs log h
/// over the monotone range.  `extra(x, p, h)` optionally adds a symbol term
/// to Op (used as a slope-degradation control).
ResidualStudy symbol_residual_study(
    const DepthProfile& prof, const std::vector<double>& hs,
    const std::function<double(double)>& phi, const ResidualStudyOptions& opts = {},
    const std::function<double(double, double, double)>& extra = nullptr);

}  // namespace wgf::strip
