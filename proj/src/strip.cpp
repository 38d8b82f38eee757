#include "wavegreen/strip.hpp"

#include <Eigen/Sparse>

#include "wavegreen/io.hpp"
#include "wavegreen/pdo.hpp"

namespace wgf::strip {

StripGrid::StripGrid(double X_, int nx_, int ny_, int nz_)
    : X(X_), nx(nx_), ny(ny_), nz(nz_) {
  if (!(X > 0)) throw DomainError("strip grid needs X > 0");
  if (nx < 8 || nz < 8) throw DomainError("strip grid needs nx, nz >= 8");
  if (ny != 1 && ny < 8) throw DomainError("strip grid needs ny = 1 or ny >= 8");
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

// Discrete system for the Dirichlet-top or Neumann-top mixed problem in
// sigma coordinates; factored once, reusable for many right-hand sides.
struct StripSystem {
  const DepthProfile& prof;
  StripGrid grid;
  double h;
  TopCondition which;

  // per-column depth data (reduced mode ignores the y components)
  Eigen::MatrixXd D, Dx, Dy, Dxx, Dyy;
  SpMat A;
  Eigen::SparseLU<SpMat> lu;

  int id(int i, int j, int k) const {
    return k + grid.nz * (i + grid.nx * std::max(j, 0));
  }

  StripSystem(const DepthProfile& p, const StripGrid& g, double h_, TopCondition w)
      : prof(p), grid(g), h(h_), which(w) {
    const int nx = grid.nx, ny = grid.ny, nz = grid.nz;
    D.resize(nx, ny);
    Dx.resize(nx, ny);
    Dy.resize(nx, ny);
    Dxx.resize(nx, ny);
    Dyy.resize(nx, ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const Vec2 x(grid.xat(i), grid.yat(j));
        D(i, j) = prof.depth(x);
        const Vec2 gd = prof.grad_depth(x);
        const Mat2 hd = prof.hess_depth(x);
        Dx(i, j) = gd[0];
        Dy(i, j) = grid.reduced() ? 0.0 : gd[1];
        Dxx(i, j) = hd(0, 0);
        Dyy(i, j) = grid.reduced() ? 0.0 : hd(1, 1);
      }

    const double dx = grid.dx(), dy = grid.dy(), ds = grid.dsigma();
    const double h2 = h * h;
    std::vector<Trip> trips;
    trips.reserve(size_t(nx) * ny * nz * 13);
    auto add = [&](int row, int i, int j, int k, double v) {
      trips.emplace_back(row, id((i + nx) % nx, ny == 1 ? 0 : (j + ny) % ny, k), v);
    };

    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double Dij = D(i, j);
        const double dxD = Dx(i, j), dyD = Dy(i, j);
        // interior rows
        for (int k = 1; k < nz - 1; ++k) {
          const int row = id(i, j, k);
          const double sig = grid.sigat(k);
          const double ax = sig * dxD / Dij;
          const double ay = sig * dyD / Dij;
          const double cx = sig * (2 * dxD * dxD / (Dij * Dij) - Dxx(i, j) / Dij);
          const double cy = sig * (2 * dyD * dyD / (Dij * Dij) - Dyy(i, j) / Dij);
          const double S = h2 * (ax * ax + ay * ay) + 1.0 / (Dij * Dij);

          double diag = 2 * h2 / (dx * dx) + 2 * S / (ds * ds);
          add(row, i + 1, j, k, -h2 / (dx * dx));
          add(row, i - 1, j, k, -h2 / (dx * dx));
          add(row, i, j, k + 1, -S / (ds * ds) - h2 * (cx + cy) / (2 * ds));
          add(row, i, j, k - 1, -S / (ds * ds) + h2 * (cx + cy) / (2 * ds));
          // cross terms +2 h^2 a W_{x sigma}
          const double gx = h2 * ax / (2 * dx * ds);
          if (gx != 0) {
            add(row, i + 1, j, k + 1, gx);
            add(row, i + 1, j, k - 1, -gx);
            add(row, i - 1, j, k + 1, -gx);
            add(row, i - 1, j, k - 1, gx);
          }
          if (ny > 1) {
            diag += 2 * h2 / (dy * dy);
            add(row, i, j + 1, k, -h2 / (dy * dy));
            add(row, i, j - 1, k, -h2 / (dy * dy));
            const double gy = h2 * ay / (2 * dy * ds);
            if (gy != 0) {
              add(row, i, j + 1, k + 1, gy);
              add(row, i, j + 1, k - 1, -gy);
              add(row, i, j - 1, k + 1, -gy);
              add(row, i, j - 1, k - 1, gy);
            }
          }
          add(row, i, j, k, diag);
        }

        // top row (sigma = 0)
        {
          const int row = id(i, j, nz - 1);
          if (which == TopCondition::Dirichlet) {
            add(row, i, j, nz - 1, 1.0);
          } else {
            // psi+ = (1/D) d_sigma Phi, one-sided third order
            add(row, i, j, nz - 1, 11.0 / (6 * ds * Dij));
            add(row, i, j, nz - 2, -18.0 / (6 * ds * Dij));
            add(row, i, j, nz - 3, 9.0 / (6 * ds * Dij));
            add(row, i, j, nz - 4, -2.0 / (6 * ds * Dij));
          }
        }
        // bottom row (sigma = -1)
        {
          const int row = id(i, j, 0);
          if (which == TopCondition::Neumann) {
            add(row, i, j, 0, 1.0);
          } else {
            // row imposes the inward conormal flux
            //   (1/D)(1 + h^2 |grad D|^2) W_sigma + h^2 <grad D, W_x> = -psi-
            // with W_sigma one-sided third order:
            //   (-11 W_0 + 18 W_1 - 9 W_2 + 2 W_3) / (6 ds)
            const double g2 = dxD * dxD + dyD * dyD;
            const double cs = (1.0 + h2 * g2) / (Dij * 6 * ds);
            add(row, i, j, 0, -11.0 * cs);
            add(row, i, j, 1, 18.0 * cs);
            add(row, i, j, 2, -9.0 * cs);
            add(row, i, j, 3, 2.0 * cs);
            add(row, i + 1, j, 0, h2 * dxD / (2 * dx));
            add(row, i - 1, j, 0, -h2 * dxD / (2 * dx));
            if (ny > 1 && dyD != 0) {
              add(row, i, j + 1, 0, h2 * dyD / (2 * dy));
              add(row, i, j - 1, 0, -h2 * dyD / (2 * dy));
            }
          }
        }
      }

    const int ntot = nx * ny * nz;
    A.resize(ntot, ntot);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    lu.compute(A);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("strip system factorization failed (singular?)");
  }

  Eigen::VectorXd rhs(const StripData& data) const {
    const int nx = grid.nx, ny = grid.ny, nz = grid.nz;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nx * ny * nz);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        if (data.f)
          for (int k = 1; k < nz - 1; ++k)
            b[id(i, j, k)] = data.f(Vec2(grid.xat(i), grid.yat(j)),
                                    grid.sigat(k) * D(i, j));
        b[id(i, j, nz - 1)] = data.top(i, j);
        // outward-conormal sign on the bottom Neumann data
        b[id(i, j, 0)] = which == TopCondition::Dirichlet ? -data.bottom(i, j)
                                                          : data.bottom(i, j);
      }
    return b;
  }

  // boundary traces from a solution vector
  void traces(const Eigen::VectorXd& u, Eigen::MatrixXd& phi_p,
              Eigen::MatrixXd& psi_p, Eigen::MatrixXd& phi_m,
              Eigen::MatrixXd& psi_m) const {
    const int nx = grid.nx, ny = grid.ny, nz = grid.nz;
    const double ds = grid.dsigma(), dx = grid.dx(), dy = grid.dy();
    const double h2 = h * h;
    phi_p.resize(nx, ny);
    psi_p.resize(nx, ny);
    phi_m.resize(nx, ny);
    psi_m.resize(nx, ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double Dij = D(i, j);
        phi_p(i, j) = u[id(i, j, nz - 1)];
        phi_m(i, j) = u[id(i, j, 0)];
        psi_p(i, j) = (11 * u[id(i, j, nz - 1)] - 18 * u[id(i, j, nz - 2)] +
                       9 * u[id(i, j, nz - 3)] - 2 * u[id(i, j, nz - 4)]) /
                      (6 * ds * Dij);
        const double wsig = (-11 * u[id(i, j, 0)] + 18 * u[id(i, j, 1)] -
                             9 * u[id(i, j, 2)] + 2 * u[id(i, j, 3)]) /
                            (6 * ds);
        const double wx =
            (u[id((i + 1) % nx, j, 0)] - u[id((i + nx - 1) % nx, j, 0)]) / (2 * dx);
        double flux = (1.0 + h2 * (Dx(i, j) * Dx(i, j) + Dy(i, j) * Dy(i, j))) *
                          wsig / Dij +
                      h2 * Dx(i, j) * wx;
        if (ny > 1) {
          const double wy = (u[id(i, (j + 1) % ny, 0)] -
                             u[id(i, (j + ny - 1) % ny, 0)]) /
                            (2 * dy);
          flux += h2 * Dy(i, j) * wy;
        }
        psi_m(i, j) = -flux;
      }
  }
};

// largest significant lattice mode index of periodic samples
int max_mode(const Eigen::VectorXd& row) {
  const int n = static_cast<int>(row.size());
  Eigen::VectorXcd c = row.cast<pdo::cdouble>();
  pdo::fft1(c, -1);
  const double peak = c.cwiseAbs().maxCoeff();
  if (peak == 0) return 0;
  int kmax = 0;
  for (int k = 0; k < n; ++k)
    if (std::abs(c[k]) > 1e-6 * peak)
      kmax = std::max(kmax, std::abs(k < n / 2 ? k : k - n));
  return kmax;
}

bool under_resolved(const StripGrid& g, const StripData& data) {
  int kmax = 0;
  for (int j = 0; j < g.ny; ++j) {
    kmax = std::max(kmax, max_mode(data.top.col(j)));
    kmax = std::max(kmax, max_mode(data.bottom.col(j)));
  }
  if (g.ny > 1)
    for (int i = 0; i < g.nx; ++i) {
      kmax = std::max(kmax, max_mode(data.top.row(i).transpose()));
      kmax = std::max(kmax, max_mode(data.bottom.row(i).transpose()));
    }
  // fewer than 8 nodes per shortest data wavelength
  return kmax > 0 && std::min(g.nx, g.ny > 1 ? g.ny : g.nx) < 8 * kmax;
}

}  // namespace

StripSolution solve_mixed(const DepthProfile& prof, const StripGrid& grid,
                          double h, const StripData& data, TopCondition which) {
  if (!(h > 0)) throw DomainError("solve_mixed needs h > 0");
  if (data.top.rows() != grid.nx || data.top.cols() != grid.ny ||
      data.bottom.rows() != grid.nx || data.bottom.cols() != grid.ny)
    throw DomainError("boundary data shape does not match the grid");

  StripSystem sys(prof, grid, h, which);
  const Eigen::VectorXd b = sys.rhs(data);
  const Eigen::VectorXd u = sys.lu.solve(b);
  if (sys.lu.info() != Eigen::Success || !u.allFinite())
    throw std::runtime_error("strip solve failed");

  StripSolution sol{grid, h, {}, {}, {}, {}, {}, 0.0, false};
  sol.levels.assign(grid.nz, Eigen::MatrixXd(grid.nx, grid.ny));
  for (int k = 0; k < grid.nz; ++k)
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i)
        sol.levels[k](i, j) = u[sys.id(i, j, k)];
  sys.traces(u, sol.phi_plus, sol.psi_plus, sol.phi_minus, sol.psi_minus);
  sol.interior_residual =
      (sys.A * u - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
  sol.resolution_warning = under_resolved(grid, data);
  return sol;
}

DtNMatrices assemble_dtn(const DepthProfile& prof, const StripGrid& grid, double h) {
  if (grid.nx > 128 || (grid.ny > 1 && grid.ny > 128))
    throw DomainError("dense assembly capped at 128 nodes per axis");
  StripSystem sys(prof, grid, h, TopCondition::Dirichlet);
  const int nb = grid.nboundary();
  DtNMatrices m{Eigen::MatrixXd(nb, nb), Eigen::MatrixXd(nb, nb),
                Eigen::MatrixXd(nb, nb), Eigen::MatrixXd(nb, nb), grid, h, "delta"};

  StripData data;
  data.top = Eigen::MatrixXd::Zero(grid.nx, grid.ny);
  data.bottom = Eigen::MatrixXd::Zero(grid.nx, grid.ny);
  Eigen::MatrixXd pp, sp, pm, sm;
  for (int side = 0; side < 2; ++side)
    for (int c = 0; c < nb; ++c) {
      Eigen::MatrixXd& slot = side == 0 ? data.top : data.bottom;
      slot(c % grid.nx, c / grid.nx) = 1.0;
      const Eigen::VectorXd u = sys.lu.solve(sys.rhs(data));
      slot(c % grid.nx, c / grid.nx) = 0.0;
      sys.traces(u, pp, sp, pm, sm);
      if (side == 0) {
        m.L11.col(c) = Eigen::Map<Eigen::VectorXd>(sp.data(), nb);
        m.L21.col(c) = Eigen::Map<Eigen::VectorXd>(pm.data(), nb);
      } else {
        m.L12.col(c) = Eigen::Map<Eigen::VectorXd>(sp.data(), nb);
        m.L22.col(c) = Eigen::Map<Eigen::VectorXd>(pm.data(), nb);
      }
    }
  return m;
}

AdjointnessReport adjointness_report(const DtNMatrices& mats,
                                     const Eigen::VectorXd& weights) {
  if (weights.size() != mats.L11.rows())
    throw DomainError("weight vector size mismatch");
  if (weights.minCoeff() <= 0) throw DomainError("weights must be positive");
  const Eigen::VectorXd winv = weights.cwiseInverse();
  auto star = [&](const Eigen::MatrixXd& M) -> Eigen::MatrixXd {
    // adjoint in the pairing <a,b> = sum_i w_i a_i b_i
    return winv.asDiagonal() * M.transpose() * weights.asDiagonal();
  };
  AdjointnessReport rep{};
  rep.r11 = (mats.L11 - star(mats.L11)).norm() / mats.L11.norm();
  rep.r22 = (mats.L22 - star(mats.L22)).norm() / mats.L22.norm();
  rep.r12 = (star(mats.L21) + mats.L12).norm() / mats.L12.norm();
  rep.pass = rep.r11 <= 5e-2 && rep.r22 <= 5e-2 && rep.r12 <= 5e-2;
  return rep;
}

ResidualStudy symbol_residual_study(
    const DepthProfile& prof, const std::vector<double>& hs,
    const std::function<double(double)>& phi, const ResidualStudyOptions& opts,
    const std::function<double(double, double, double)>& extra) {
  if (hs.size() < 2) throw DomainError("residual study needs >= 2 h values");

  ResidualStudy study;
  study.hs = hs;
  std::vector<size_t> order(hs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return hs[a] > hs[b]; });

  study.residuals.assign(hs.size(), 0.0);
  for (size_t idx = 0; idx < hs.size(); ++idx) {
    const double h = hs[idx];
    auto data_at = [&](double x) { return phi(x) * std::cos(opts.p0 * x / h); };

    // base grid resolving the carrier wavelength 2 pi h / p0
    int nxb = opts.nx;
    const double need =
        opts.points_per_wavelength * 2.0 * opts.X * opts.p0 / (2.0 * M_PI * h);
    while (nxb < need) nxb += 32;

    auto surface_apply = [&](int nx, int nz) {
      StripGrid g(opts.X, nx, 1, nz);
      StripData data;
      data.top.resize(nx, 1);
      for (int i = 0; i < nx; ++i) data.top(i, 0) = data_at(g.xat(i));
      data.bottom = Eigen::MatrixXd::Zero(nx, 1);
      StripSolution sol = solve_mixed(prof, g, h, data, TopCondition::Dirichlet);
      return Eigen::VectorXd(sol.psi_plus.col(0));
    };

    const Eigen::VectorXd coarse = surface_apply(nxb, opts.nz);
    const Eigen::VectorXd fine = surface_apply(2 * nxb, 2 * opts.nz - 1);
    Eigen::VectorXd rich(nxb);
    for (int i = 0; i < nxb; ++i)
      rich[i] = (4.0 * fine[2 * i] - coarse[i]) / 3.0;

    Eigen::VectorXcd phiv(nxb);
    const double dxb = 2.0 * opts.X / nxb;
    for (int i = 0; i < nxb; ++i) phiv[i] = data_at(-opts.X + i * dxb);
    auto a1d = [&](double x, double p) {
      double v = dispersion::surface_symbol_radial(prof.depth(Vec2(x, 0.0)),
                                                   std::abs(p));
      if (extra) v += extra(x, p, h);
      return v;
    };
    const Eigen::VectorXcd op = pdo::apply_symbol_1d(phiv, opts.X, h, a1d);

    study.residuals[idx] =
        (rich.cast<pdo::cdouble>() - op).norm() / phiv.norm();
  }

  // monotone range: residual must decrease as h decreases
  study.in_fit.assign(hs.size(), false);
  size_t last_ok = 0;
  for (size_t q = 0; q < order.size(); ++q) {
    if (q > 0 &&
        study.residuals[order[q]] >= study.residuals[order[q - 1]])
      break;
    last_ok = q;
  }
  study.monotone = last_ok == order.size() - 1;
  std::vector<double> lx, ly;
  for (size_t q = 0; q <= last_ok; ++q) {
    study.in_fit[order[q]] = true;
    lx.push_back(std::log(hs[order[q]]));
    ly.push_back(std::log(std::max(study.residuals[order[q]], 1e-300)));
  }
  study.slope = lx.size() >= 2 ? io::fit_slope(lx, ly) : 0.0;
  return study;
}

}  // namespace wgf::strip
