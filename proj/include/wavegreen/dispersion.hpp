#pragma once

#include <cmath>
#include <limits>

#include "wavegreen/bathymetry.hpp"

// Closed-form symbol layer for the water-wave Dirichlet-to-Neumann operator:
// dispersion root Z(s), surface symbol |p| tanh(D|p|), bottom coupling
// 1/cosh(D|p|), the conformal / Schrodinger normal-form data at energy E,
// elliptic factorization factors, and the vertical profile symbols.
// All functions here are pure; gravity is normalized to 1, so E = omega^2.

namespace wgf::dispersion {

struct PhasePoint {
  Vec2 x;
  Vec2 p;
};

/// Positive root z of s = z tanh z.  Strictly increasing, Z(0)=0,
/// Z(s) ~ sqrt(s) as s->0 and Z(s) ~ s as s->infinity.
inline double dispersion_root(double s) {
  if (s < 0) throw DomainError("dispersion root needs s >= 0");
  if (s == 0) return 0.0;
  // Newton from max(sqrt(s), s), bisection safeguard on [lo, hi].
  double z = std::max(std::sqrt(s), s);
  double lo = 0.0, hi = z + 1.0;
  const double tol = 1e-13 * std::max(1.0, s);
  for (int it = 0; it < 200; ++it) {
    const double t = std::tanh(z);
    const double f = z * t - s;
    if (std::abs(f) <= tol) return z;
    if (f > 0)
      hi = z;
    else
      lo = z;
    const double df = t + z * (1.0 - t * t);
    double zn = z - f / df;
    if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
    z = zn;
  }
  throw std::runtime_error("dispersion root did not converge");
}

/// d/ds of the dispersion root, from the implicit relation.
inline double dispersion_root_prime(double s) {
  const double z = dispersion_root(s);
  const double t = std::tanh(z);
  return 1.0 / (t + z * (1.0 - t * t));
}

/// Surface DtN principal symbol |p| tanh(D(x)|p|).
inline double surface_symbol(const DepthProfile& prof, const PhasePoint& pt) {
  const double P = pt.p.norm();
  return P * std::tanh(prof.depth(pt.x) * P);
}

/// Same symbol as a function of (depth, |p|); the radial form used by
/// multiplier and table-based operator application.
inline double surface_symbol_radial(double D, double P) {
  return P * std::tanh(D * P);
}

/// d/d|p| of the surface symbol at fixed depth.
inline double surface_symbol_dP(double D, double P) {
  const double t = std::tanh(D * P);
  return t + D * P * (1.0 - t * t);
}

/// d^2/d|p|^2 of the surface symbol at fixed depth.
inline double surface_symbol_d2P(double D, double P) {
  const double t = std::tanh(D * P);
  return 2.0 * D * (1.0 - t * t) * (1.0 - D * P * t);
}

/// Bottom-to-surface coupling symbol 1/cosh(D(x)|p|); in (0,1], decays
/// exponentially in |p|.
inline double bottom_coupling(const DepthProfile& prof, const PhasePoint& pt) {
  return 1.0 / std::cosh(prof.depth(pt.x) * pt.p.norm());
}
inline double bottom_coupling_radial(double D, double P) {
  return 1.0 / std::cosh(D * P);
}

/// Normal-form data at (x, E): characteristic momentum radius r, conformal
/// factor g = 1/r, metric coefficient G = g^2, effective potential V = r^2.
struct NormalFormData {
  double E;
  double r;
  double g;
  double G;
  double V;
};

inline NormalFormData normal_form(const DepthProfile& prof, const Vec2& x, double E) {
  if (!(E > 0)) throw DomainError("normal form needs E > 0");
  const double D = prof.depth(x);
  const double r = dispersion_root(E * D) / D;
  NormalFormData nf;
  nf.E = E;
  nf.r = r;
  nf.g = 1.0 / r;
  nf.G = nf.g * nf.g;
  nf.V = r * r;
  return nf;
}

/// x-gradient of the momentum radius r(x,E) = Z(E D(x))/D(x).
inline Vec2 grad_radius(const DepthProfile& prof, const Vec2& x, double E) {
  const double D = prof.depth(x);
  const double drdD =
      E * dispersion_root_prime(E * D) / D - dispersion_root(E * D) / (D * D);
  return drdD * prof.grad_depth(x);
}

namespace detail {
// Quotient num(|p|) / (L0(|p|) - E) extended across the common zero |p| = r
// by the derivative quotient, with a first-order Taylor term so the two
// branches agree to O((|p|-r)^2) at the switch.
inline double level_quotient(double D, double P, double E, double r,
                             double num_val, double num_prime_at_r,
                             double num_second_at_r) {
  const double L0 = surface_symbol_radial(D, P);
  if (std::abs(L0 - E) < 1e-6 * std::max(E, 1.0)) {
    const double d1 = surface_symbol_dP(D, r);
    const double d2 = surface_symbol_d2P(D, r);
    const double q0 = num_prime_at_r / d1;
    const double q1 = (num_second_at_r * d1 - num_prime_at_r * d2) / (2.0 * d1 * d1);
    const double q = q0 + q1 * (P - r);
    if (q <= 0) throw ValidityError("elliptic factor quotient not positive");
    return q;
  }
  const double q = num_val / (L0 - E);
  if (q <= 0) throw ValidityError("elliptic factor quotient not positive");
  return q;
}
}  // namespace detail

/// Elliptic factor C0 with  G(x,E)|p|^2 - 1 = C0^2 (L0 - E).
inline double elliptic_factor_C0(const DepthProfile& prof, const PhasePoint& pt,
                                 double E) {
  const double P = pt.p.norm();
  if (P == 0) throw DomainError("elliptic factor undefined at p = 0");
  const double D = prof.depth(pt.x);
  const auto nf = normal_form(prof, pt.x, E);
  const double num = nf.G * P * P - 1.0;
  return std::sqrt(detail::level_quotient(D, P, E, nf.r, num, 2.0 * nf.G * nf.r, 2.0 * nf.G));
}

/// Elliptic factor F0 with  |p|^2 - V(x,E) = F0^2 (L0 - E); F0 = r * C0.
inline double elliptic_factor_F0(const DepthProfile& prof, const PhasePoint& pt,
                                 double E) {
  const double P = pt.p.norm();
  if (P == 0) throw DomainError("elliptic factor undefined at p = 0");
  const double D = prof.depth(pt.x);
  const auto nf = normal_form(prof, pt.x, E);
  const double num = P * P - nf.V;
  return std::sqrt(detail::level_quotient(D, P, E, nf.r, num, 2.0 * nf.r, 2.0));
}

/// Elliptic factor B0 with  g(x,E)|p| - 1 = B0^2 (L0 - E); this is the factor
/// conjugating L0 - E to the 1-homogeneous (Finsler) normal form,
/// B0 = C0 / sqrt(g|p| + 1).
inline double elliptic_factor_B0(const DepthProfile& prof, const PhasePoint& pt,
                                 double E) {
  const auto nf = normal_form(prof, pt.x, E);
  return elliptic_factor_C0(prof, pt, E) / std::sqrt(nf.g * pt.p.norm() + 1.0);
}

/// Vertical profile symbol cosh((z+D)|p|) / cosh(D|p|) on -D <= z <= 0.
/// Equals 1 at the surface; its bottom trace is the coupling symbol.
inline double vertical_profile(const DepthProfile& prof, const PhasePoint& pt,
                               double z) {
  const double D = prof.depth(pt.x);
  if (z < -D - 1e-12 || z > 1e-12)
    throw DomainError("vertical coordinate outside [-D, 0]");
  const double P = pt.p.norm();
  // cosh((z+D)P)/cosh(DP) computed stably for large DP
  if (D * P > 30.0) return std::exp(z * P) * (1.0 + std::exp(-2 * (z + D) * P)) /
                           (1.0 + std::exp(-2 * D * P));
  return std::cosh((z + D) * P) / std::cosh(D * P);
}

/// First-correction vertical profile: solves
///   R1'' - |p|^2 R1 = 2 <p, d_x R0>,  R1(0) = 0,
///   R1'(-D) = <grad D, p> R0(-D)
/// by a second-order finite-difference two-point solve on the given z-grid.
/// Returns samples on the grid (ascending z from -D to 0).
inline Eigen::VectorXd first_correction_profile(const DepthProfile& prof,
                                                const PhasePoint& pt,
                                                const Eigen::VectorXd& zgrid) {
  const int n = static_cast<int>(zgrid.size());
  if (n < 3) throw DomainError("z-grid too small");
  const double D = prof.depth(pt.x);
  const double P = pt.p.norm();
  if (P == 0) throw DomainError("first correction needs p != 0");
  const Vec2 gD = prof.grad_depth(pt.x);
  const double pdotgD = pt.p.dot(gD);
  const double dz = zgrid[1] - zgrid[0];

  auto rhs = [&](double z) {
    // 2 <p, d_x R0> with d_x R0 = grad D * |p| sinh(z|p|) / cosh^2(D|p|)
    return 2.0 * pdotgD * P * std::sinh(z * P) /
           (std::cosh(D * P) * std::cosh(D * P));
  };

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int i = 1; i < n - 1; ++i) {
    A(i, i - 1) = 1.0 / (dz * dz);
    A(i, i) = -2.0 / (dz * dz) - P * P;
    A(i, i + 1) = 1.0 / (dz * dz);
    b[i] = rhs(zgrid[i]);
  }
  // bottom Neumann, one-sided second order: (-3 f0 + 4 f1 - f2) / (2 dz)
  A(0, 0) = -3.0 / (2 * dz);
  A(0, 1) = 4.0 / (2 * dz);
  A(0, 2) = -1.0 / (2 * dz);
  b[0] = pdotgD * vertical_profile(prof, pt, zgrid[0]);
  // surface Dirichlet
  A(n - 1, n - 1) = 1.0;
  b[n - 1] = 0.0;

  Eigen::VectorXd sol = A.partialPivLu().solve(b);
  if (!sol.allFinite()) throw std::runtime_error("first-correction solve failed");
  return sol;
}

}  // namespace wgf::dispersion
