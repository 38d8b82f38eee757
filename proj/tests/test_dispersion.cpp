#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "wavegreen/dispersion.hpp"

using namespace wgf;
using namespace wgf::dispersion;

namespace {
// Independent oracle: safeguarded bisection on z tanh z - s.
double root_by_bisection(double s) {
  double lo = 0.0, hi = std::max(std::sqrt(s), s) + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::tanh(mid) < s)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}
}  // namespace

TEST_CASE("dispersion root") {
  CHECK(dispersion_root(0.0) == 0.0);
  CHECK(dispersion_root(1.0) == doctest::Approx(root_by_bisection(1.0)).epsilon(1e-12));
  CHECK(dispersion_root(1.0) == doctest::Approx(1.19968).epsilon(1e-4));
  CHECK(dispersion_root(0.01) == doctest::Approx(0.100167).epsilon(1e-4));
  CHECK(dispersion_root(50.0) == doctest::Approx(50.0).epsilon(1e-10));
  CHECK_THROWS_AS(dispersion_root(-1.0), DomainError);

  SUBCASE("defining relation and monotonicity on a log grid") {
    double prev = -1.0;
    for (double ls = -6; ls <= 3; ls += 0.25) {
      const double s = std::pow(10.0, ls);
      const double z = dispersion_root(s);
      CHECK(std::abs(z * std::tanh(z) - s) <= 1e-12 * std::max(1.0, s));
      CHECK(z > prev);
      prev = z;
    }
  }
  SUBCASE("sandwich bounds") {
    for (double ls = -6; ls <= 0; ls += 0.25) {
      const double s = std::pow(10.0, ls);
      CHECK(dispersion_root(s) >= std::sqrt(s) / (1.0 + s / 6.0));
    }
    for (double ls = 0; ls <= 3; ls += 0.25) {
      const double s = std::pow(10.0, ls);
      const double z = dispersion_root(s);
      CHECK(std::abs(z - s) <= 2.0000001 * z * std::exp(-2 * z));
    }
  }
}

TEST_CASE("surface symbol") {
  auto prof = DepthProfile::constant(1.0);
  CHECK(surface_symbol(prof, {Vec2(0, 0), Vec2(1, 0)}) ==
        doctest::Approx(std::tanh(1.0)).epsilon(1e-12));
  CHECK(surface_symbol(prof, {Vec2(0, 0), Vec2(0, 0)}) == 0.0);
  // deep-water limit L0/|p| -> 1
  CHECK(surface_symbol(prof, {Vec2(0, 0), Vec2(30, 0)}) / 30.0 ==
        doctest::Approx(1.0).epsilon(1e-12));
  // shallow-water Taylor limit
  const double P = 0.01;
  CHECK(surface_symbol(prof, {Vec2(0, 0), Vec2(P, 0)}) ==
        doctest::Approx(P * P * (1 - P * P / 3)).epsilon(1e-8));
  // strictly increasing in |p|
  double prev = 0;
  for (double p = 0.1; p < 10; p += 0.1) {
    const double v = surface_symbol(prof, {Vec2(0, 0), Vec2(p, 0)});
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("bottom coupling") {
  auto prof = DepthProfile::constant(1.0);
  CHECK(bottom_coupling(prof, {Vec2(0, 0), Vec2(0, 0)}) == 1.0);
  CHECK(bottom_coupling(prof, {Vec2(0, 0), Vec2(1, 0)}) ==
        doctest::Approx(1.0 / std::cosh(1.0)).epsilon(1e-12));
  CHECK(bottom_coupling(prof, {Vec2(0, 0), Vec2(20, 0)}) <= 5e-9);
}

TEST_CASE("normal form") {
  auto prof = DepthProfile::constant(1.0);
  auto nf = normal_form(prof, Vec2(0, 0), 1.0);
  CHECK(nf.r == doctest::Approx(1.19968).epsilon(1e-4));
  CHECK(nf.g == doctest::Approx(0.83356).epsilon(1e-4));
  CHECK(nf.V == doctest::Approx(1.43923).epsilon(1e-4));
  // postcondition identity: L0 on the characteristic circle equals E
  for (double th = 0; th < 6.28; th += 0.7) {
    Vec2 p = nf.r * Vec2(std::cos(th), std::sin(th));
    CHECK(std::abs(surface_symbol(prof, {Vec2(0, 0), p}) - 1.0) < 1e-10);
  }
  SUBCASE("shallow regime V -> E/D") {
    auto shallow = DepthProfile::constant(1e-3);
    auto nfs = normal_form(shallow, Vec2(0, 0), 1.0);
    CHECK(nfs.V == doctest::Approx(1.0 / 1e-3).epsilon(1e-3));
  }
  SUBCASE("x-independence on constant profile") {
    auto nf2 = normal_form(prof, Vec2(5, -3), 1.0);
    CHECK(nf2.r == nf.r);
  }
}

TEST_CASE("level-set coincidence of the three characteristic circles") {
  auto prof = DepthProfile::radial_bump(1.0, 0.3, 1.0);
  for (double E : {0.5, 1.0, 2.0}) {
    for (double xx : {0.0, 0.7, 2.0}) {
      auto nf = normal_form(prof, Vec2(xx, 0.3), E);
      // positive root of L0 = E found independently by bisection in |p|
      double lo = 1e-6, hi = 100;
      const double D = prof.depth(Vec2(xx, 0.3));
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (surface_symbol_radial(D, mid) < E)
          lo = mid;
        else
          hi = mid;
      }
      CHECK(std::abs(0.5 * (lo + hi) - nf.r) < 1e-10 * std::max(1.0, nf.r));
      // same circle for the conformal metric: G r^2 = 1
      CHECK(nf.G * nf.r * nf.r == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("elliptic factors") {
  auto prof = DepthProfile::constant(1.0);
  const double E = 1.0;
  auto nf = normal_form(prof, Vec2(0, 0), E);
  const double r = nf.r;

  SUBCASE("on-shell value from the derivative quotient") {
    const double dL0 = surface_symbol_dP(1.0, r);
    const double c0 = elliptic_factor_C0(prof, {Vec2(0, 0), Vec2(r, 0)}, E);
    CHECK(c0 * c0 == doctest::Approx((2.0 / r) / dL0).epsilon(1e-9));
    const double f0 = elliptic_factor_F0(prof, {Vec2(0, 0), Vec2(r, 0)}, E);
    CHECK(f0 * f0 == doctest::Approx(2.0 * r / dL0).epsilon(1e-9));
    // cross-check with finite differences in |p| just off the shell
    const double dp = 1e-4;
    const double num = nf.G * (r + dp) * (r + dp) - 1.0;
    const double den = surface_symbol_radial(1.0, r + dp) - E;
    CHECK(c0 * c0 == doctest::Approx(num / den).epsilon(1e-3));
  }
  SUBCASE("off-shell direct quotient") {
    const double c0 = elliptic_factor_C0(prof, {Vec2(0, 0), Vec2(0.5, 0)}, E);
    const double num = nf.G * 0.25 - 1.0;
    const double den = surface_symbol_radial(1.0, 0.5) - E;
    CHECK(c0 == doctest::Approx(std::sqrt(num / den)).epsilon(1e-12));
    CHECK(num / den > 0);
  }
  SUBCASE("relation F0 = r C0 and evenness") {
    for (double P : {0.3, 0.9, 1.5, 3.0}) {
      const double c0 = elliptic_factor_C0(prof, {Vec2(0, 0), Vec2(0, P)}, E);
      const double f0 = elliptic_factor_F0(prof, {Vec2(0, 0), Vec2(0, P)}, E);
      CHECK(f0 == doctest::Approx(r * c0).epsilon(1e-10));
      CHECK(c0 == elliptic_factor_C0(prof, {Vec2(0, 0), Vec2(0, -P)}, E));
    }
  }
  SUBCASE("continuity across the shell") {
    // a branch-switch jump would show up as a spike in the second difference
    const double dp = 2.5e-5;
    std::vector<double> vals;
    for (double P = r - 5e-4; P <= r + 5e-4; P += dp)
      vals.push_back(elliptic_factor_C0(prof, {Vec2(0, 0), Vec2(P, 0)}, E));
    for (size_t i = 1; i + 1 < vals.size(); ++i)
      CHECK(std::abs(vals[i + 1] - 2 * vals[i] + vals[i - 1]) < 1e-6 * vals[i]);
  }
  SUBCASE("p = 0 rejected") {
    CHECK_THROWS_AS(elliptic_factor_C0(prof, {Vec2(0, 0), Vec2(0, 0)}, E),
                    DomainError);
  }
}

TEST_CASE("vertical profile") {
  auto prof = DepthProfile::constant(1.0);
  CHECK(vertical_profile(prof, {Vec2(0, 0), Vec2(1, 0)}, 0.0) == 1.0);
  CHECK(vertical_profile(prof, {Vec2(0, 0), Vec2(0, 0)}, -0.5) == 1.0);
  // bottom trace equals the coupling symbol
  CHECK(vertical_profile(prof, {Vec2(0, 0), Vec2(1, 0)}, -1.0) ==
        doctest::Approx(1.0 / std::cosh(1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(vertical_profile(prof, {Vec2(0, 0), Vec2(1, 0)}, -1.5),
                  DomainError);

  SUBCASE("solves the vertical ODE (finite differences)") {
    const PhasePoint pt{Vec2(0, 0), Vec2(1.3, 0.4)};
    const double P = pt.p.norm(), dz = 1e-4;
    for (double z : {-0.8, -0.5, -0.2}) {
      const double d2 = (vertical_profile(prof, pt, z + dz) -
                         2 * vertical_profile(prof, pt, z) +
                         vertical_profile(prof, pt, z - dz)) /
                        (dz * dz);
      CHECK(d2 == doctest::Approx(P * P * vertical_profile(prof, pt, z)).epsilon(1e-5));
    }
  }
  SUBCASE("bottom Neumann condition") {
    const PhasePoint pt{Vec2(0, 0), Vec2(2, 0)};
    const double dz = 1e-6;
    const double dv = (vertical_profile(prof, pt, -1.0 + dz) -
                       vertical_profile(prof, pt, -1.0)) / dz;
    CHECK(std::abs(dv) < 1e-5);
  }
}

TEST_CASE("first-correction vertical profile") {
  const int n = 201;
  SUBCASE("constant profile gives zero") {
    auto prof = DepthProfile::constant(1.0);
    Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(n, -1.0, 0.0);
    auto r1 = first_correction_profile(prof, {Vec2(0, 0), Vec2(1, 0)}, z);
    CHECK(r1.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("ramp profile: residual check and antisymmetry in p") {
    // D(x) = 1 + 0.1 x1 sampled as a gridded profile so grad D is nonzero
    const int m = 65;
    const double X = 2.0, dx = 2 * X / (m - 1);
    Eigen::MatrixXd g(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) g(i, j) = 1.0 + 0.1 * (-X + i * dx);
    auto prof = DepthProfile::gridded(g, -X, -X, dx, dx, 1.0);

    const PhasePoint pt{Vec2(0, 0), Vec2(1, 0)};
    const double D = prof.depth(pt.x), P = pt.p.norm();
    Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(n, -D, 0.0);
    auto r1 = first_correction_profile(prof, pt, z);
    CHECK(r1.cwiseAbs().maxCoeff() > 1e-4);

    // interior ODE residual on the grid
    const double dz = z[1] - z[0];
    const Vec2 gD = prof.grad_depth(pt.x);
    double res = 0;
    for (int i = 1; i < n - 1; ++i) {
      const double rhs = 2.0 * pt.p.dot(gD) * P * std::sinh(z[i] * P) /
                         (std::cosh(D * P) * std::cosh(D * P));
      res = std::max(res, std::abs((r1[i - 1] - 2 * r1[i] + r1[i + 1]) / (dz * dz) -
                                   P * P * r1[i] - rhs));
    }
    CHECK(res < 1e-8);
    // boundary residuals
    CHECK(std::abs(r1[n - 1]) < 1e-12);
    const double dbot = (-3 * r1[0] + 4 * r1[1] - r1[2]) / (2 * dz);
    CHECK(std::abs(dbot - pt.p.dot(gD) * vertical_profile(prof, pt, -D)) < 1e-8);

    auto r1m = first_correction_profile(prof, {pt.x, -pt.p}, z);
    CHECK((r1 + r1m).cwiseAbs().maxCoeff() < 1e-12);
  }
}
