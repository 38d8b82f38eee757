#include "wavegreen/greenfn.hpp"

#include <algorithm>
#include <cmath>

#include "wavegreen/io.hpp"

namespace wgf::greenfn {

namespace {

constexpr cdouble I1(0.0, 1.0);

// ---- smooth cutoffs ----

double phi_exp(double u) { return u > 0 ? std::exp(-1.0 / u) : 0.0; }
// C-infinity monotone step, 0 at u<=0, 1 at u>=1
double sstep(double u) {
  const double a = phi_exp(u), b = phi_exp(1.0 - u);
  return a / (a + b);
}

double bump01(double xi) {  // C0-infinity bump on (-1,1), peak 1 at 0
  const double x2 = xi * xi;
  return x2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - x2)) : 0.0;
}

// ---- composite Gauss-Legendre quadrature with doubling ----

constexpr double kGlNode[8] = {0.0950125098376374, 0.2816035507792589,
                               0.4580167776572274, 0.6178762444026438,
                               0.7554044083550030, 0.8656312023878318,
                               0.9445750230732326, 0.9894009349916499};
constexpr double kGlWeight[8] = {0.1894506104550685, 0.1826034150449236,
                                 0.1691565193950025, 0.1495959888165767,
                                 0.1246289712555339, 0.0951585116824928,
                                 0.0622535239386479, 0.0271524594117541};

template <class F>
cdouble gl16_composite(F&& f, double a, double b, int npan, double* fmax) {
  const double len = (b - a) / npan;
  cdouble acc = 0.0;
  double fm = 0.0;
  for (int p = 0; p < npan; ++p) {
    const double c = a + (p + 0.5) * len, hw = 0.5 * len;
    cdouble s = 0.0;
    for (int k = 0; k < 8; ++k) {
      const cdouble fp = f(c + hw * kGlNode[k]);
      const cdouble fmn = f(c - hw * kGlNode[k]);
      s += kGlWeight[k] * (fp + fmn);
      fm = std::max({fm, std::abs(fp), std::abs(fmn)});
    }
    acc += hw * s;
  }
  if (fmax) *fmax = fm;
  return acc;
}

/// Integrates f over [a, b]; osc is the phase rate (radians per unit length)
/// used to seed the panel count.  Doubles panels until the result is stable.
template <class F>
cdouble adaptive_integral(F&& f, double a, double b, double osc) {
  if (b <= a) return 0.0;
  int npan = std::clamp(static_cast<int>(std::ceil((b - a) * osc / 12.0)), 4, 1 << 13);
  double fmax = 0.0;
  cdouble prev = gl16_composite(f, a, b, npan, &fmax);
  const double scale0 = fmax * (b - a);
  for (int it = 0; it < 7; ++it) {
    npan *= 2;
    const cdouble cur = gl16_composite(f, a, b, npan, nullptr);
    const double err = std::abs(cur - prev);
    if (err <= 1e-7 * std::max(std::abs(cur), 1e-3 * scale0 + 1e-300)) return cur;
    prev = cur;
  }
  throw pdo::NonConvergenceError("radial quadrature did not stabilize",
                                 std::abs(prev));
}

// ---- radial lookup tables (all assembled fields are built around radial
// momentum amplitudes, so the non-WKB terms depend on |x - x0| only) ----

struct RadialTable {
  double dR;
  std::vector<cdouble> vals;

  static RadialTable build(double Rmax, double dR,
                           const std::function<cdouble(double)>& f) {
    RadialTable t;
    t.dR = dR;
    const int n = static_cast<int>(std::ceil(Rmax / dR)) + 4;
    t.vals.resize(n);
    io::parallel_for(n, [&](std::int64_t k) { t.vals[k] = f(k * dR); });
    return t;
  }
  cdouble at(double R) const {  // Catmull-Rom on the uniform table
    const double u = R / dR;
    const int n = static_cast<int>(vals.size());
    const int i = std::clamp(static_cast<int>(u), 1, n - 3);
    const double s = u - i;
    const cdouble &m1 = vals[i - 1], &p0 = vals[i], &p1 = vals[i + 1], &p2 = vals[i + 2];
    return p0 + 0.5 * s * (p1 - m1 +
                           s * (2.0 * m1 - 5.0 * p0 + 4.0 * p1 - p2 +
                                s * (3.0 * (p0 - p1) + p2 - m1)));
  }
};

double bessel_j0(double x) { return std::cyl_bessel_j(0.0, x); }

// rho momentum cutoff: 1 in the plateau band around r0, falls smoothly to 0
double rho_cut(double P, double r0, const Cutoffs& c) {
  const double d = std::abs(P - r0) / r0;
  if (d <= c.rho_plateau) return 1.0;
  if (d >= c.rho_plateau + c.rho_taper) return 0.0;
  return 1.0 - sstep((d - c.rho_plateau) / c.rho_taper);
}

// theta time cutoff: 1 up to t0/2, 0 beyond t0
double theta_cut(double tau, double t0) {
  if (tau <= 0.5 * t0) return 1.0;
  if (tau >= t0) return 0.0;
  return sstep((t0 - tau) / (0.5 * t0));
}

/// i/h * int A(P) P J0(P R / h) / (L0(P) - E - i eps) dP with the pole at
/// L0(r) = E handled by subtracting c / (P - z), z = r + i eps / L0'(r),
/// whose integral is added back in closed form (the -i0 limit gives the
/// outgoing principal-value + i pi residue combination).
cdouble outgoing_kernel(double D0, const SourceModel& model, double eps, double R) {
  const double h = model.h, E = model.E;
  const double r = dispersion::dispersion_root(E * D0) / D0;
  auto amp = [&](double P) { return model.A(P) * P * bessel_j0(P * R / h); };
  auto den = [&](double P) {
    return cdouble(dispersion::surface_symbol_radial(D0, P) - E, -eps);
  };
  const double osc = R / h + 2.0;

  if (r <= model.Pmin || r >= model.Pmax) {
    const cdouble v = adaptive_integral([&](double P) { return amp(P) / den(P); },
                                        model.Pmin, model.Pmax, osc);
    return I1 / h * model.normalization * v;
  }
  const double dL = dispersion::surface_symbol_dP(D0, r);
  const cdouble c = amp(r) / dL;
  const double delta = eps / dL;
  const cdouble z(r, delta);
  auto sub = [&](double P) { return amp(P) / den(P) - c / (P - z); };
  const cdouble reg = adaptive_integral(sub, model.Pmin, r, osc) +
                      adaptive_integral(sub, r, model.Pmax, osc);
  // delta = +0 must approach the pole from below the real axis in P - z
  const cdouble logterm =
      std::log(cdouble(model.Pmax - r, -delta)) - std::log(cdouble(model.Pmin - r, -delta));
  return I1 / h * model.normalization * (reg + c * logterm);
}

struct ThetaTable {  // Theta(omega) = int_0^t0 theta(tau) e^{-i tau omega / h} dtau
  double w0, dw;
  std::vector<cdouble> vals;

  static ThetaTable build(double wlo, double whi, double t0, double h) {
    ThetaTable t;
    t.w0 = wlo;
    const int n = 512;
    t.dw = (whi - wlo) / (n - 5);
    t.vals.resize(n);
    io::parallel_for(n, [&](std::int64_t k) {
      const double w = wlo + (k - 2) * t.dw;
      t.vals[k] = adaptive_integral(
          [&](double tau) {
            return theta_cut(tau, t0) * std::exp(-I1 * tau * w / h);
          },
          0.0, t0, std::abs(w) / h + 1.0);
    });
    return t;
  }
  cdouble at(double w) const {
    const double u = (w - w0) / dw + 2.0;
    const int n = static_cast<int>(vals.size());
    const int i = std::clamp(static_cast<int>(u), 1, n - 3);
    const double s = u - i;
    const cdouble &m1 = vals[i - 1], &p0 = vals[i], &p1 = vals[i + 1], &p2 = vals[i + 2];
    return p0 + 0.5 * s * (p1 - m1 +
                           s * (2.0 * m1 - 5.0 * p0 + 4.0 * p1 - p2 +
                                s * (3.0 * (p0 - p1) + p2 - m1)));
  }
};

double table_step(const SourceModel& model) {
  return 2.0 * M_PI * model.h / (model.Pmax * 8.0);
}

}  // namespace

SourceModel SourceModel::annular(const DepthProfile& prof, const Vec2& x0, double E,
                                 double h, double rel_width) {
  if (!(E > 0 && h > 0 && rel_width > 0 && rel_width < 1))
    throw DomainError("annular source needs E, h > 0 and 0 < width < 1");
  const double r = dispersion::normal_form(prof, x0, E).r;
  SourceModel m;
  m.x0 = x0;
  m.E = E;
  m.h = h;
  m.Pmin = r * (1.0 - rel_width);
  m.Pmax = r * (1.0 + rel_width);
  m.A = [r, rel_width](double P) { return bump01((P - r) / (rel_width * r)); };
  return m;
}

pdo::GridField2 source_field(const SourceModel& model, const pdo::Grid2& grid) {
  if (std::abs(grid.h - model.h) > 1e-12)
    throw DomainError("grid h does not match the source model");
  if (grid.nodes_per_wavelength(model.Pmax) < 4.0)
    throw DomainError("grid does not resolve the source scale h");
  const double Rmax = 2.0 * std::sqrt(2.0) * grid.X + 1.0;
  const RadialTable tab = RadialTable::build(Rmax, table_step(model), [&](double R) {
    return I1 / model.h * model.normalization *
           adaptive_integral(
               [&](double P) {
                 return cdouble(model.A(P) * P * bessel_j0(P * R / model.h));
               },
               model.Pmin, model.Pmax, R / model.h + 2.0);
  });
  pdo::GridField2 f = pdo::GridField2::zero(grid);
  io::parallel_for(grid.n, [&](std::int64_t i) {
    for (int j = 0; j < grid.n; ++j) {
      const Vec2 x(grid.xat(static_cast<int>(i)), grid.xat(j));
      f.v(i, j) = tab.at((x - model.x0).norm());
    }
  });
  return f;
}

std::vector<cdouble> exact_green_constant_depth(double D0, const SourceModel& model,
                                                double eps,
                                                const std::vector<Vec2>& points) {
  if (!(D0 > 0) || eps < 0) throw DomainError("exact kernel needs D0 > 0, eps >= 0");
  std::vector<cdouble> out(points.size());
  io::parallel_for(static_cast<std::int64_t>(points.size()), [&](std::int64_t k) {
    out[k] = outgoing_kernel(D0, model, eps, (points[k] - model.x0).norm());
  });
  return out;
}

GreenField assemble_green(const DepthProfile& prof, const rays::LagrangianFan& fan,
                          const SourceModel& model, const pdo::Grid2& obs,
                          const Cutoffs& cutoffs) {
  if (fan.kind != rays::HamiltonianKind::Finsler)
    throw DomainError("assemble_green needs a fan launched with the Finsler form");
  if (std::abs(fan.E - model.E) > 1e-12 || (fan.x0 - model.x0).norm() > 1e-12)
    throw DomainError("fan and source model disagree on E or x0");
  const double h = model.h, E = model.E;
  const Vec2 x0 = model.x0;
  const double r0 = fan.r0;
  const double D0x = prof.depth(x0);
  const double v0 = dispersion::surface_symbol_dP(D0x, r0);
  const double t0 = cutoffs.t0 > 0 ? cutoffs.t0 : 10.0 * h / v0;

  // physical (group-speed) time and amplitude weight along each finsler ray
  const int na = static_cast<int>(fan.rays.size());
  std::vector<std::vector<double>> tau(na), wamp(na);
  io::parallel_for(na, [&](std::int64_t q) {
    const auto& st = fan.rays[q].traj.states;
    const double dtf = fan.rays[q].traj.dt;
    tau[q].resize(st.size());
    wamp[q].resize(st.size());
    double prev_rate = 0.0, acc = 0.0;
    for (size_t i = 0; i < st.size(); ++i) {
      const double ri = dispersion::normal_form(prof, st[i].x, E).r;
      const double vi = dispersion::surface_symbol_dP(prof.depth(st[i].x), ri);
      wamp[q][i] = std::sqrt(r0 / v0) / std::sqrt(ri * vi);
      const double rate = 1.0 / (ri * vi);  // dtau/dt_finsler = g / v
      if (i > 0) acc += 0.5 * (rate + prev_rate) * dtf;
      tau[q][i] = acc;
      prev_rate = rate;
    }
  });
  double Jmax = 0.0;
  for (const auto& ray : fan.rays)
    for (const auto& st : ray.traj.states) Jmax = std::max(Jmax, std::abs(st.J));
  const double Jmin = cutoffs.j_min_rel * Jmax;

  // non-characteristic and transitional terms: radial tables (depth frozen
  // at the source; their support/decay scale is O(h))
  const double Rmax = 2.0 * std::sqrt(2.0) * obs.X + 1.0;
  auto L0s = [&](double P) { return dispersion::surface_symbol_radial(D0x, P); };
  const RadialTable t1 = RadialTable::build(Rmax, table_step(model), [&](double R) {
    return I1 / h * model.normalization *
           adaptive_integral(
               [&](double P) -> cdouble {
                 const double c = 1.0 - rho_cut(P, r0, cutoffs);
                 if (c == 0.0) return 0.0;
                 return c * model.A(P) * P * bessel_j0(P * R / h) / (L0s(P) - E);
               },
               model.Pmin, model.Pmax, R / h + 2.0);
  });
  const ThetaTable th = ThetaTable::build(L0s(model.Pmin) - E, L0s(model.Pmax) - E,
                                          t0, h);
  const RadialTable t3 = RadialTable::build(Rmax, table_step(model), [&](double R) {
    return -1.0 / (h * h) * model.normalization *
           adaptive_integral(
               [&](double P) -> cdouble {
                 const double c = rho_cut(P, r0, cutoffs);
                 if (c == 0.0) return 0.0;
                 return c * model.A(P) * P * bessel_j0(P * R / h) * th.at(L0s(P) - E);
               },
               model.Pmin, model.Pmax, R / h + 2.0);
  });

  // triangulate the fan chart in x and bin triangles over the grid cells
  struct Tri {
    int32_t q, qn, i;
    int8_t upper;
  };
  std::vector<Tri> tris;
  size_t nmin = SIZE_MAX;
  for (const auto& ray : fan.rays) nmin = std::min(nmin, ray.traj.states.size());
  tris.reserve(2 * na * nmin);
  for (int q = 0; q < na; ++q) {
    const int qn = (q + 1) % na;
    for (size_t i = 0; i + 1 < nmin; ++i)
      for (int8_t up = 0; up < 2; ++up)
        tris.push_back({q, qn, static_cast<int32_t>(i), up});
  }
  auto corner = [&](const Tri& t, int c) -> const rays::RayState& {
    // lower: (q,i) (qn,i) (q,i+1); upper: (qn,i) (qn,i+1) (q,i+1)
    const int q = (t.upper ? (c < 2 ? t.qn : t.q) : (c == 1 ? t.qn : t.q));
    const int i = t.i + (t.upper ? (c >= 1) : (c == 2));
    return fan.rays[q].traj.states[i];
  };
  auto corner_aux = [&](const Tri& t, int c, const std::vector<std::vector<double>>& a) {
    const int q = (t.upper ? (c < 2 ? t.qn : t.q) : (c == 1 ? t.qn : t.q));
    const int i = t.i + (t.upper ? (c >= 1) : (c == 2));
    return a[q][i];
  };

  const int n = obs.n;
  const double dx = obs.dx();
  auto cell_of = [&](double x) {
    return std::clamp(static_cast<int>(std::floor((x + obs.X) / dx)), 0, n - 1);
  };
  std::vector<int> count(static_cast<size_t>(n) * n + 1, 0);
  auto bbox_cells = [&](const Tri& t, auto&& body) {
    double x0b = 1e300, x1b = -1e300, y0b = 1e300, y1b = -1e300;
    for (int c = 0; c < 3; ++c) {
      const Vec2& x = corner(t, c).x;
      x0b = std::min(x0b, x[0]);
      x1b = std::max(x1b, x[0]);
      y0b = std::min(y0b, x[1]);
      y1b = std::max(y1b, x[1]);
    }
    if (x1b < -obs.X || x0b > obs.X || y1b < -obs.X || y0b > obs.X) return;
    for (int ci = cell_of(x0b); ci <= cell_of(x1b); ++ci)
      for (int cj = cell_of(y0b); cj <= cell_of(y1b); ++cj) body(ci, cj);
  };
  for (const auto& t : tris)
    bbox_cells(t, [&](int ci, int cj) { ++count[static_cast<size_t>(ci) * n + cj + 1]; });
  for (size_t k = 1; k < count.size(); ++k) count[k] += count[k - 1];
  std::vector<int32_t> bin_tris(count.back());
  {
    std::vector<int> cursor(count.begin(), count.end() - 1);
    for (size_t ti = 0; ti < tris.size(); ++ti)
      bbox_cells(tris[ti], [&](int ci, int cj) {
        bin_tris[cursor[static_cast<size_t>(ci) * n + cj]++] = static_cast<int32_t>(ti);
      });
  }

  GreenField out{obs,
                 Eigen::MatrixXcd::Zero(n, n),
                 E,
                 h,
                 0.0,
                 cutoffs,
                 t0,
                 Eigen::MatrixXi::Zero(n, n),
                 Eigen::MatrixXi::Zero(n, n)};
  const double aA = model.A(r0) * model.normalization;
  const cdouble pref = cutoffs.kappa * aA * std::sqrt(2.0 * M_PI / h);

  io::parallel_for(n, [&](std::int64_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < n; ++j) {
      const Vec2 x(obs.xat(i), obs.xat(j));
      cdouble u = t1.at((x - x0).norm()) + t3.at((x - x0).norm());
      const size_t bin = static_cast<size_t>(cell_of(x[0])) * n + cell_of(x[1]);
      int branches = 0;
      bool caustic = false;
      // (S, m) per accepted branch; a point on a shared triangle edge is found
      // in both neighbors but represents one sheet
      std::vector<std::pair<double, int>> seen;
      for (int k = count[bin]; k < count[bin + 1]; ++k) {
        const Tri& t = tris[bin_tris[k]];
        const rays::RayState& A = corner(t, 0);
        const rays::RayState& B = corner(t, 1);
        const rays::RayState& C = corner(t, 2);
        const Vec2 e0 = B.x - A.x, e1 = C.x - A.x, e2 = x - A.x;
        const double det = e0[0] * e1[1] - e0[1] * e1[0];
        if (std::abs(det) < 1e-14) continue;
        const double lb = (e2[0] * e1[1] - e2[1] * e1[0]) / det;
        const double lc = (e0[0] * e2[1] - e0[1] * e2[0]) / det;
        const double la = 1.0 - lb - lc;
        const double tol = 1e-10;
        if (la < -tol || lb < -tol || lc < -tol) continue;
        // linear interpolation with first-order phase correction p.(x - x_c)
        const double S = la * (A.S + A.p.dot(x - A.x)) + lb * (B.S + B.p.dot(x - B.x)) +
                         lc * (C.S + C.p.dot(x - C.x));
        const double J = la * A.J + lb * B.J + lc * C.J;
        const double tph = la * corner_aux(t, 0, tau) + lb * corner_aux(t, 1, tau) +
                           lc * corner_aux(t, 2, tau);
        const double w = la * corner_aux(t, 0, wamp) + lb * corner_aux(t, 1, wamp) +
                         lc * corner_aux(t, 2, wamp);
        int m = A.maslov;
        if (B.maslov != m || C.maslov != m) {
          caustic = true;
          m = std::max({A.maslov, B.maslov, C.maslov});
        }
        bool dup = false;
        for (const auto& [Sp, mp] : seen)
          if (mp == m && std::abs(Sp - S) < 1e-6 * std::max(1.0, std::abs(S)))
            dup = true;
        if (dup) continue;
        seen.emplace_back(S, m);
        ++branches;
        if (std::abs(J) < Jmin) caustic = true;
        const double gate = 1.0 - theta_cut(tph, t0);
        if (gate == 0.0 || std::abs(J) == 0.0) continue;
        u += pref * w / std::sqrt(std::abs(J)) *
             std::exp(I1 * (S / h + 0.75 * M_PI - 0.5 * M_PI * m)) * gate;
      }
      out.u(i, j) = u;
      out.branch_count(i, j) = branches;
      out.caustic_flag(i, j) = caustic ? 1 : 0;
    }
  });
  return out;
}

cdouble calibrate_constant(double D0, const SourceModel& model) {
  const auto prof = DepthProfile::constant(D0);
  const double r0 = dispersion::dispersion_root(model.E * D0) / D0;
  const double T = 1.15 * r0 * 3.5;  // finsler time to cover the annulus
  const auto fan = rays::launch_fan(prof, model.x0, model.E, 256, T, 0.02,
                                    rays::Hamiltonian::finsler(model.E));
  const pdo::Grid2 obs(4.0, 256, model.h);
  Cutoffs c;
  c.kappa = 1.0;
  const GreenField g = assemble_green(prof, fan, model, obs, c);

  // least-squares complex ratio exact / assembled on the annulus
  const double Rmax = std::sqrt(2.0) * obs.X + 1.0;
  cdouble num = 0.0;
  double den = 0.0;
  const RadialTable oracle = RadialTable::build(Rmax, table_step(model), [&](double R) {
    return outgoing_kernel(D0, model, 0.0, R);
  });
  for (int i = 0; i < obs.n; ++i)
    for (int j = 0; j < obs.n; ++j) {
      const Vec2 x(obs.xat(i), obs.xat(j));
      const double R = (x - model.x0).norm();
      if (R < 1.5 || R > 2.5 || g.caustic_flag(i, j) || g.branch_count(i, j) == 0)
        continue;
      const cdouble a = g.u(i, j);
      num += oracle.at(R) * std::conj(a);
      den += std::norm(a);
    }
  if (den == 0.0) throw ValidityError("calibration annulus has no usable points");
  return num / den;
}

AbsorptionStudy limiting_absorption_study(const DepthProfile& prof,
                                          const SourceModel& model,
                                          const std::vector<double>& eps_schedule,
                                          const pdo::Grid2& grid) {
  if (eps_schedule.size() < 2)
    throw DomainError("absorption schedule needs at least two values");
  for (size_t k = 1; k < eps_schedule.size(); ++k)
    if (!(eps_schedule[k] < eps_schedule[k - 1]) || !(eps_schedule[k] > 0))
      throw DomainError("absorption schedule must be positive and strictly decreasing");

  const pdo::GridField2 f = source_field(model, grid);
  auto weight = [&](int i, int j) {
    const Vec2 x(grid.xat(i), grid.xat(j));
    return 1.0 / std::sqrt(1.0 + x.squaredNorm());
  };
  AbsorptionStudy study{eps_schedule,
                        {},
                        false,
                        pdo::GridField2::zero(grid),
                        pdo::GridField2::zero(grid),
                        -1.0};
  pdo::GridField2 prev = pdo::GridField2::zero(grid);
  for (size_t k = 0; k < eps_schedule.size(); ++k) {
    pdo::ResolventQuery q{model.E, eps_schedule[k]};
    q.max_iter = 800;
    pdo::GridField2 u = pdo::resolvent_solve(prof, f, q);
    if (k > 0) {
      double acc = 0.0;
      for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j)
          acc += std::norm(weight(i, j) * (u.v(i, j) - prev.v(i, j)));
      study.cauchy.push_back(std::sqrt(acc) * grid.dx());
      study.extrapolated = u;
      study.extrapolated.v = 2.0 * u.v - prev.v;
    }
    prev = std::move(u);
  }
  study.monotone = true;
  for (size_t k = 1; k < study.cauchy.size(); ++k)
    if (study.cauchy[k] >= study.cauchy[k - 1]) study.monotone = false;

  if (prof.is_constant()) {
    const double Rmax = std::sqrt(2.0) * grid.X + 1.0;
    const RadialTable oracle = RadialTable::build(Rmax, table_step(model), [&](double R) {
      return outgoing_kernel(prof.D0(), model, eps_schedule.back(), R);
    });
    double dev = 0.0, ref = 0.0;
    for (int i = 0; i < grid.n; ++i)
      for (int j = 0; j < grid.n; ++j) {
        const Vec2 x(grid.xat(i), grid.xat(j));
        const double R = (x - model.x0).norm();
        if (R < 0.75 || R > 3.0) continue;
        const double w = weight(i, j);
        dev += std::norm(w * (prev.v(i, j) - oracle.at(R)));
        ref += std::norm(w * oracle.at(R));
      }
    study.oracle_dev = std::sqrt(dev / ref);
  }
  study.final_field = std::move(prev);
  return study;
}

pdo::GridField2 bottom_to_surface_response(const DepthProfile& prof,
                                           const pdo::GridField2& f_minus,
                                           double E, double eps) {
  const pdo::GridField2 coupled =
      pdo::apply_symbol(pdo::coupling_symbol_op(prof), f_minus);
  pdo::ResolventQuery q{E, eps};
  return pdo::resolvent_solve(prof, coupled, q);
}

}  // namespace wgf::greenfn
