#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "wavegreen/bathymetry.hpp"
#include "wavegreen/dispersion.hpp"

// Grid-based pseudodifferential quantization on periodic boxes: apply Op(a)
// for symbols a(x,p), solve resolvent systems (L - E - i eps) u = f, and
// estimate weighted resolvent norms.
//
// Quantization convention: symmetrized standard quantization
// (Op(a) + Op(a)^dagger)/2, where the standard rule acts per x by synthesis
// over the discrete momentum lattice p_k = h * (pi/X) * k.  For x-independent
// symbols this is exactly the Fourier multiplier a(p).

namespace wgf::pdo {

using cdouble = std::complex<double>;

struct NonConvergenceError : std::runtime_error {
  double achieved_residual;
  std::vector<double> history;
  NonConvergenceError(const std::string& what, double res,
                      std::vector<double> hist = {})
      : std::runtime_error(what), achieved_residual(res), history(std::move(hist)) {}
};

/// Periodic box [-X, X)^2 with n nodes per axis (power of two) and
/// semiclassical parameter h.
struct Grid2 {
  double X;
  int n;
  double h;

  Grid2(double X_, int n_, double h_);
  double dx() const { return 2.0 * X / n; }
  double xat(int i) const { return -X + i * dx(); }
  /// Signed lattice frequency index for FFT bin k.
  int ksigned(int k) const { return k < n / 2 ? k : k - n; }
  /// Semiclassical momentum of FFT bin k.
  double pat(int k) const { return h * (M_PI / X) * ksigned(k); }
  /// Nodes per characteristic wavelength 2*pi*h/pref.
  double nodes_per_wavelength(double pref) const {
    return 2.0 * M_PI * h / (pref * dx());
  }
};

/// Complex samples v(i,j) at (xat(i), xat(j)).
struct GridField2 {
  Grid2 grid;
  Eigen::MatrixXcd v;

  static GridField2 zero(const Grid2& g) {
    return {g, Eigen::MatrixXcd::Zero(g.n, g.n)};
  }
  double norm() const { return v.norm() * grid.dx(); }
  cdouble dot(const GridField2& o) const {
    return (v.conjugate().cwiseProduct(o.v)).sum() * grid.dx() * grid.dx();
  }
};

/// In-place 2-D DFT of an n x n field; sign -1 forward, +1 inverse
/// (inverse includes the 1/n^2 factor).
void fft2(Eigen::MatrixXcd& a, int sign);
void fft1(Eigen::VectorXcd& a, int sign);

/// Symbol a(x,p) with enough structure for fast application.
class Symbol {
 public:
  /// x-independent symbol a(p).
  static Symbol multiplier(std::function<double(const Vec2&)> a);
  /// a(x,p) = F(D(x), |p|); applied exactly for constant profiles and via a
  /// cubic depth table otherwise.
  static Symbol depth_radial(const DepthProfile& prof,
                             std::function<double(double, double)> F);
  /// General a(x,p), applied by per-x synthesis (O(N^4), small grids only).
  static Symbol general(std::function<double(const Vec2&, const Vec2&)> a);

  bool x_independent() const;
  double eval(const Vec2& x, const Vec2& p) const;

  const DepthProfile* profile() const { return prof_; }
  std::function<double(double, double)> radial() const { return fD_; }

 private:
  friend GridField2 apply_symbol(const Symbol&, const GridField2&);
  enum class Kind { XIndependent, DepthRadial, General } kind_;
  std::function<double(const Vec2&)> fp_;
  std::function<double(double, double)> fD_;
  std::function<double(const Vec2&, const Vec2&)> fxp_;
  const DepthProfile* prof_ = nullptr;
};

/// Surface DtN principal symbol as an applicable Symbol.
Symbol surface_symbol_op(const DepthProfile& prof);
/// Bottom-to-surface coupling symbol as an applicable Symbol.
Symbol coupling_symbol_op(const DepthProfile& prof);

/// Symmetrized standard quantization of the symbol applied to the field.
GridField2 apply_symbol(const Symbol& sym, const GridField2& f);

/// 1-D variant on [-X, X) used by the strip residual study: a1d(x, p).
/// Symmetrized; multiplier-exact when a1d is x-independent.
Eigen::VectorXcd apply_symbol_1d(const Eigen::VectorXcd& f, double X, double h,
                                 const std::function<double(double, double)>& a1d);

struct ResolventQuery {
  double E;
  double eps;          // absorption, > 0 for solves
  double s = 1.0;      // weight exponent for norm estimates
  double tol = 1e-8;   // relative residual target
  int max_iter = 400;
};

/// Solves (Op(L0) - E - i eps) u = f to the query tolerance.  Constant-depth
/// profiles solve exactly by Fourier multiplier; otherwise preconditioned
/// GMRES with the reference-depth multiplier as preconditioner.
/// conj = true solves with +i eps (the adjoint problem).
GridField2 resolvent_solve(const DepthProfile& prof, const GridField2& f,
                           const ResolventQuery& query, bool conj = false);

struct ScalingReport {
  std::vector<double> hs;
  std::vector<double> norms;  // n(h)
  std::vector<double> eps_used;
  double slope;  // of log n vs log(1/h)
};

struct WeightedNormOptions {
  double X = 20.0;
  int min_nodes_per_wavelength = 6;
  std::function<double(double)> eps_of_h;  // default h^2
  int power_max_iter = 300;
  double power_tol = 1e-4;
  uint64_t seed = 1234;
};

/// Estimates n(h) = || <x>^{-s} (L - E - i eps(h))^{-1} <x>^{-s} || by power
/// iteration for each h and fits the slope of log n vs log(1/h).
ScalingReport weighted_resolvent_norm(const DepthProfile& prof,
                                      const ResolventQuery& query,
                                      const std::vector<double>& hs,
                                      const WeightedNormOptions& opts = {});

}  // namespace wgf::pdo
