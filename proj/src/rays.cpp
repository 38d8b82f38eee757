#include "wavegreen/rays.hpp"

#include <algorithm>

#include "wavegreen/io.hpp"

namespace wgf::rays {

namespace {
constexpr double kMomentumFloor = 1e-10;
}

double Hamiltonian::value(const DepthProfile& prof, const PhasePoint& pt) const {
  const double P = pt.p.norm();
  switch (kind) {
    case HamiltonianKind::SurfaceSymbol:
      return dispersion::surface_symbol_radial(prof.depth(pt.x), P);
    case HamiltonianKind::Finsler:
      return P / dispersion::normal_form(prof, pt.x, E).r;
    case HamiltonianKind::Schrodinger:
      return P * P - dispersion::normal_form(prof, pt.x, E).V;
  }
  return 0.0;
}

Vec4 Hamiltonian::field(const DepthProfile& prof, const Vec4& z) const {
  const Vec2 x = z.head<2>(), p = z.tail<2>();
  const double P = p.norm();
  Vec2 dxH, dpH;
  switch (kind) {
    case HamiltonianKind::SurfaceSymbol: {
      if (P < kMomentumFloor)
        throw ValidityError("surface-symbol flow hit |p| = 0");
      const double D = prof.depth(x);
      const double th = std::tanh(D * P);
      dpH = (th + D * P * (1 - th * th)) * p / P;
      dxH = P * P * (1 - th * th) * prof.grad_depth(x);
      break;
    }
    case HamiltonianKind::Finsler: {
      if (P < kMomentumFloor) throw ValidityError("finsler flow hit |p| = 0");
      const double r = dispersion::normal_form(prof, x, E).r;
      const Vec2 gr = dispersion::grad_radius(prof, x, E);
      dpH = p / (P * r);
      dxH = -(P / (r * r)) * gr;
      break;
    }
    case HamiltonianKind::Schrodinger: {
      const double r = dispersion::normal_form(prof, x, E).r;
      const Vec2 gr = dispersion::grad_radius(prof, x, E);
      dpH = 2 * p;
      dxH = -2 * r * gr;
      break;
    }
  }
  Vec4 dz;
  dz.head<2>() = dpH;
  dz.tail<2>() = -dxH;
  return dz;
}

namespace {

// Jacobian of the Hamiltonian field by central differences.
Mat4 field_jacobian(const DepthProfile& prof, const Hamiltonian& ham,
                    const Vec4& z) {
  const double step = 1e-5;
  Mat4 A;
  for (int c = 0; c < 4; ++c) {
    Vec4 zp = z, zm = z;
    zp[c] += step;
    zm[c] -= step;
    A.col(c) = (ham.field(prof, zp) - ham.field(prof, zm)) / (2 * step);
  }
  return A;
}

struct FullState {
  Vec4 z;
  double S;
  Mat4 M;
};

FullState deriv(const DepthProfile& prof, const Hamiltonian& ham,
                const FullState& s) {
  FullState d;
  d.z = ham.field(prof, s.z);
  d.S = s.z.tail<2>().dot(d.z.head<2>());  // p . dx/dt
  d.M = field_jacobian(prof, ham, s.z) * s.M;
  return d;
}

FullState axpy(const FullState& a, double c, const FullState& b) {
  return {a.z + c * b.z, a.S + c * b.S, a.M + c * b.M};
}

}  // namespace

Trajectory flow(const DepthProfile& prof, const Hamiltonian& ham,
                const PhasePoint& initial, double T, double dt) {
  if (!(dt > 0)) throw DomainError("flow needs dt > 0");
  const double dts = T >= 0 ? dt : -dt;
  const int nsteps = static_cast<int>(std::ceil(std::abs(T) / dt - 1e-12));

  Trajectory traj;
  traj.dt = dts;
  traj.truncated = false;
  traj.energy_drift = 0.0;

  FullState s{Vec4(), 0.0, Mat4::Identity()};
  s.z.head<2>() = initial.x;
  s.z.tail<2>() = initial.p;
  const double H0 = ham.value(prof, initial);

  auto record = [&](double t) {
    RayState rs;
    rs.x = s.z.head<2>();
    rs.p = s.z.tail<2>();
    rs.t = t;
    rs.S = s.S;
    rs.M = s.M;
    rs.maslov = 0;
    rs.J = 0.0;
    traj.states.push_back(rs);
  };
  record(0.0);

  for (int n = 0; n < nsteps; ++n) {
    const Vec2 xcur = s.z.head<2>();
    if (!prof.eval_box().contains(xcur)) {
      traj.truncated = true;
      break;
    }
    // classical RK4 on (z, S, M)
    try {
      const FullState k1 = deriv(prof, ham, s);
      const FullState k2 = deriv(prof, ham, axpy(s, 0.5 * dts, k1));
      const FullState k3 = deriv(prof, ham, axpy(s, 0.5 * dts, k2));
      const FullState k4 = deriv(prof, ham, axpy(s, dts, k3));
      s.z += (dts / 6) * (k1.z + 2 * k2.z + 2 * k3.z + k4.z);
      s.S += (dts / 6) * (k1.S + 2 * k2.S + 2 * k3.S + k4.S);
      s.M += (dts / 6) * (k1.M + 2 * k2.M + 2 * k3.M + k4.M);
    } catch (const DomainError&) {
      // stepped outside a gridded profile's box mid-stage
      traj.truncated = true;
      break;
    }
    if (!prof.eval_box().contains(Vec2(s.z.head<2>()))) {
      traj.truncated = true;
      record((n + 1) * dts);
      break;
    }
    record((n + 1) * dts);
    const double H = ham.value(prof, {s.z.head<2>(), s.z.tail<2>()});
    traj.energy_drift = std::max(traj.energy_drift, std::abs(H - H0));
  }
  return traj;
}

RayState Trajectory::at_time(double t) const {
  if (states.empty()) throw DomainError("empty trajectory");
  const double tend = states.back().t;
  if ((dt > 0 && (t < -1e-12 || t > tend + 1e-12)) ||
      (dt < 0 && (t > 1e-12 || t < tend - 1e-12)))
    throw DomainError("dense output time outside the trajectory");
  const double u = std::clamp(t / dt, 0.0, double(states.size() - 1));
  const int i0 = std::min(static_cast<int>(u), static_cast<int>(states.size()) - 2);
  const double a = u - i0;  // in [0,1]
  const RayState& A = states[i0];
  const RayState& B = states[i0 + 1];
  // Hermite on x using p-direction velocities is overkill here; the stored
  // step is already the accuracy limiter, so blend cubically on x and p via
  // Catmull-Rom style tangents from neighboring nodes when available.
  RayState out = a < 0.5 ? A : B;
  const double h00 = (1 + 2 * a) * (1 - a) * (1 - a), h10 = a * (1 - a) * (1 - a);
  const double h01 = a * a * (3 - 2 * a), h11 = a * a * (a - 1);
  auto tangent = [&](int i) -> std::pair<Vec2, Vec2> {
    const int im = std::max(i - 1, 0);
    const int ip = std::min(i + 1, static_cast<int>(states.size()) - 1);
    const double span = (ip - im) * dt;
    return {(states[ip].x - states[im].x) / span,
            (states[ip].p - states[im].p) / span};
  };
  auto [vxA, vpA] = tangent(i0);
  auto [vxB, vpB] = tangent(i0 + 1);
  out.x = h00 * A.x + h10 * dt * vxA + h01 * B.x + h11 * dt * vxB;
  out.p = h00 * A.p + h10 * dt * vpA + h01 * B.p + h11 * dt * vpB;
  out.t = t;
  out.S = (1 - a) * A.S + a * B.S +
          a * (1 - a) * 0.0;  // S interpolated linearly (second order in dt)
  out.J = (1 - a) * A.J + a * B.J;
  out.maslov = a < 1.0 ? A.maslov : B.maslov;
  return out;
}

OverlapReport maupertuis_overlap(const DepthProfile& prof, double E,
                                 const PhasePoint& initial, double T, double dt) {
  OverlapReport rep{};
  const auto nf = dispersion::normal_form(prof, initial.x, E);
  const double P = initial.p.norm();
  const double m1 =
      std::abs(dispersion::surface_symbol_radial(prof.depth(initial.x), P) - E) /
      std::max(E, 1.0);
  const double m2 = std::abs(nf.g * P - 1.0);
  const double m3 = std::abs(P * P - nf.V) / std::max(nf.V, 1.0);
  rep.shell_mismatch = std::max({m1, m2, m3});
  rep.shell_ok = rep.shell_mismatch <= 1e-8;

  // the three flows traverse the same curve at different speeds; give each
  // enough clock time to cover a comparable arclength
  const Trajectory t1 = flow(prof, Hamiltonian::surface(), initial, T, dt);
  const Trajectory t2 = flow(prof, Hamiltonian::finsler(E), initial, T, dt);
  const Trajectory t3 = flow(prof, Hamiltonian::schrodinger(E), initial, T, dt);

  auto arclength_resample = [](const Trajectory& tr, double Lmax, int n) {
    std::vector<double> cum{0.0};
    for (size_t i = 1; i < tr.states.size(); ++i)
      cum.push_back(cum.back() + (tr.states[i].x - tr.states[i - 1].x).norm());
    std::vector<Vec2> pts;
    pts.reserve(n);
    for (int k = 0; k < n; ++k) {
      const double target = Lmax * k / (n - 1);
      auto it = std::lower_bound(cum.begin(), cum.end(), target);
      size_t j = std::min<size_t>(it - cum.begin(), cum.size() - 1);
      if (j == 0) j = 1;
      const double seg = cum[j] - cum[j - 1];
      const double a = seg > 0 ? (target - cum[j - 1]) / seg : 0.0;
      pts.push_back((1 - a) * tr.states[j - 1].x + a * tr.states[j].x);
    }
    return pts;
  };
  auto total_length = [](const Trajectory& tr) {
    double L = 0;
    for (size_t i = 1; i < tr.states.size(); ++i)
      L += (tr.states[i].x - tr.states[i - 1].x).norm();
    return L;
  };
  const double L = std::min({total_length(t1), total_length(t2), total_length(t3)});
  const int n = 2048;
  const auto c1 = arclength_resample(t1, L, n);
  const auto c2 = arclength_resample(t2, L, n);
  const auto c3 = arclength_resample(t3, L, n);

  auto hausdorff = [](const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    auto dist_to = [](const Vec2& q, const std::vector<Vec2>& poly) {
      double best = std::numeric_limits<double>::max();
      for (size_t i = 1; i < poly.size(); ++i) {
        const Vec2 d = poly[i] - poly[i - 1];
        const double len2 = d.squaredNorm();
        double u = len2 > 0 ? (q - poly[i - 1]).dot(d) / len2 : 0.0;
        u = std::clamp(u, 0.0, 1.0);
        best = std::min(best, (q - (poly[i - 1] + u * d)).norm());
      }
      return best;
    };
    double h = 0;
    for (const auto& q : a) h = std::max(h, dist_to(q, b));
    for (const auto& q : b) h = std::max(h, dist_to(q, a));
    return h;
  };
  rep.d_surface_finsler = hausdorff(c1, c2);
  rep.d_surface_schrodinger = hausdorff(c1, c3);
  rep.d_finsler_schrodinger = hausdorff(c2, c3);
  return rep;
}

LagrangianFan launch_fan(const DepthProfile& prof, const Vec2& x0, double E,
                         int n_angles, double T, double dt,
                         const Hamiltonian& ham) {
  if (n_angles < 16) throw DomainError("fan needs at least 16 angles");
  LagrangianFan fan;
  fan.x0 = x0;
  fan.E = E;
  fan.kind = ham.kind;
  fan.r0 = dispersion::normal_form(prof, x0, E).r;
  fan.rays.resize(n_angles);

  io::parallel_for(n_angles, [&](std::int64_t q) {
    const double theta = 2 * M_PI * q / n_angles;
    const Vec2 p0 = fan.r0 * Vec2(std::cos(theta), std::sin(theta));
    FanRay ray;
    ray.theta = theta;
    ray.traj = flow(prof, ham, {x0, p0}, T, dt);

    // transverse spreading from the variational matrix applied to the
    // launch variation (0, dp0/dtheta)
    const Vec2 dp0 = fan.r0 * Vec2(-std::sin(theta), std::cos(theta));
    Vec4 dz0 = Vec4::Zero();
    dz0.tail<2>() = dp0;
    int zero_run = 0;
    for (size_t i = 0; i < ray.traj.states.size(); ++i) {
      RayState& st = ray.traj.states[i];
      const Vec2 xdot = ham.field(prof, (Vec4() << st.x, st.p).finished()).head<2>();
      const Vec2 dx = (st.M * dz0).head<2>();
      st.J = xdot[0] * dx[1] - xdot[1] * dx[0];
      if (i == 0) {
        st.maslov = 0;
        continue;
      }
      const RayState& prev = ray.traj.states[i - 1];
      st.maslov = prev.maslov;
      if (i >= 2 && prev.J != 0.0 && st.J != 0.0 &&
          std::signbit(st.J) != std::signbit(prev.J)) {
        st.maslov += 1;
        // quadratic refinement of the crossing time from three J samples
        const double j0 = ray.traj.states[i - 2].J, j1 = prev.J, j2 = st.J;
        const double denom = j0 - 2 * j1 + j2;
        double tau = (j1 != j2) ? (j1 / (j1 - j2)) : 0.5;
        if (std::abs(denom) > 1e-30) {
          const double b = (j2 - j0) / 2, a = denom / 2;
          const double disc = b * b - 4 * a * j1;
          if (disc >= 0) {
            const double root = (-b + (b > 0 ? -1 : 1) * std::sqrt(disc)) / (2 * a);
            if (root > 0 && root < 1) tau = root;
          }
        }
        ray.caustic_times.push_back(prev.t + tau * ray.traj.dt);
      }
      if (i > 5) {
        zero_run = st.J == 0.0 ? zero_run + 1 : 0;
        if (zero_run > 5) throw ValidityError("degenerate fan: J vanishes on an interval");
      }
    }
    fan.rays[q] = std::move(ray);
  });
  return fan;
}

NontrappingReport nontrapping_check(const DepthProfile& prof, double E,
                                    const std::vector<PhasePoint>& launches,
                                    double T_max, double R_escape, double dt) {
  NontrappingReport rep;
  rep.pass = true;
  rep.slowest_escape = 0.0;
  rep.records.resize(launches.size());

  io::parallel_for(static_cast<std::int64_t>(launches.size()), [&](std::int64_t q) {
    const PhasePoint& pt = launches[q];
    EscapeRecord rec{pt, false, std::numeric_limits<double>::infinity()};
    for (double dir : {1.0, -1.0}) {
      const Trajectory tr = flow(prof, Hamiltonian::surface(), pt, dir * T_max, dt);
      for (const auto& st : tr.states)
        if (st.x.norm() >= R_escape) {
          rec.escaped = true;
          rec.escape_time = std::min(rec.escape_time, std::abs(st.t));
          break;
        }
    }
    rep.records[q] = rec;
  });
  for (const auto& rec : rep.records) {
    if (!rec.escaped)
      rep.pass = false;
    else
      rep.slowest_escape = std::max(rep.slowest_escape, rec.escape_time);
  }
  return rep;
}

}  // namespace wgf::rays
