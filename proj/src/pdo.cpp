#include "wavegreen/pdo.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <random>

#include "wavegreen/io.hpp"

namespace wgf::pdo {

namespace {

// FFTW plan cache.  Plans are created with FFTW_UNALIGNED so they can be
// executed on any buffer of the right size via the new-array interface.
std::mutex g_plan_mutex;

fftw_plan plan_for(int rank, int n, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto key = std::make_tuple(rank, n, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cdouble> buf(rank == 1 ? n : size_t(n) * n);
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan =
      rank == 1 ? fftw_plan_dft_1d(n, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED)
                : fftw_plan_dft_2d(n, n, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan) throw std::runtime_error("fftw plan creation failed");
  cache.emplace(key, plan);
  return plan;
}

}  // namespace

void fft2(Eigen::MatrixXcd& a, int sign) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw DomainError("fft2 needs a square field");
  fftw_plan plan = plan_for(2, n, sign);
  auto* p = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(plan, p, p);
  if (sign == FFTW_BACKWARD) a /= double(n) * n;
}

void fft1(Eigen::VectorXcd& a, int sign) {
  const int n = static_cast<int>(a.size());
  fftw_plan plan = plan_for(1, n, sign);
  auto* p = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(plan, p, p);
  if (sign == FFTW_BACKWARD) a /= double(n);
}

Grid2::Grid2(double X_, int n_, double h_) : X(X_), n(n_), h(h_) {
  if (!(X > 0) || !(h > 0)) throw DomainError("grid needs X > 0 and h > 0");
  if (n < 8 || (n & (n - 1)) != 0)
    throw DomainError("grid size must be a power of two >= 8");
}

Symbol Symbol::multiplier(std::function<double(const Vec2&)> a) {
  Symbol s;
  s.kind_ = Kind::XIndependent;
  s.fp_ = std::move(a);
  return s;
}

Symbol Symbol::depth_radial(const DepthProfile& prof,
                            std::function<double(double, double)> F) {
  Symbol s;
  s.kind_ = Kind::DepthRadial;
  s.prof_ = &prof;
  s.fD_ = std::move(F);
  return s;
}

Symbol Symbol::general(std::function<double(const Vec2&, const Vec2&)> a) {
  Symbol s;
  s.kind_ = Kind::General;
  s.fxp_ = std::move(a);
  return s;
}

bool Symbol::x_independent() const {
  return kind_ == Kind::XIndependent ||
         (kind_ == Kind::DepthRadial && prof_->is_constant());
}

double Symbol::eval(const Vec2& x, const Vec2& p) const {
  switch (kind_) {
    case Kind::XIndependent:
      return fp_(p);
    case Kind::DepthRadial:
      return fD_(prof_->depth(x), p.norm());
    case Kind::General:
      return fxp_(x, p);
  }
  return 0.0;
}

Symbol surface_symbol_op(const DepthProfile& prof) {
  return Symbol::depth_radial(prof, &dispersion::surface_symbol_radial);
}

Symbol coupling_symbol_op(const DepthProfile& prof) {
  return Symbol::depth_radial(prof, &dispersion::bottom_coupling_radial);
}

namespace {

// Multiplier application a(p) on the momentum lattice.
GridField2 apply_multiplier(const GridField2& f,
                            const std::function<double(const Vec2&)>& a) {
  GridField2 out = f;
  fft2(out.v, FFTW_FORWARD);
  const int n = f.grid.n;
  for (int kj = 0; kj < n; ++kj)
    for (int ki = 0; ki < n; ++ki) {
      const double m = a(Vec2(f.grid.pat(ki), f.grid.pat(kj)));
      if (!std::isfinite(m)) throw std::runtime_error("symbol non-finite on lattice");
      out.v(ki, kj) *= m;
    }
  fft2(out.v, FFTW_BACKWARD);
  return out;
}

// Catmull-Rom weights at t in [0,1] for the four surrounding nodes.
std::array<double, 4> cr4(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {-0.5 * t3 + t2 - 0.5 * t, 1.5 * t3 - 2.5 * t2 + 1.0,
          -1.5 * t3 + 2.0 * t2 + 0.5 * t, 0.5 * t3 - 0.5 * t2};
}

// Depth-table path: the operator with symbol F(D(x),|p|) is written as
// sum_j c_j(x) * M_{a_j} where a_j(p) = F(D_j,|p|) at table depths D_j and
// c_j(x) are cubic interpolation weights in D(x).  The adjoint swaps the
// order of weight and multiplier; the symmetrized operator is their mean.
GridField2 apply_depth_table(const GridField2& f, const DepthProfile& prof,
                             const std::function<double(double, double)>& F) {
  const int n = f.grid.n;
  auto [dlo, dhi] = prof.depth_range(f.grid.X);
  const int m = 33;
  const double pad = std::max(1e-8, 1e-3 * (dhi - dlo));
  dlo -= pad;
  dhi += pad;
  const double dd = (dhi - dlo) / (m - 1);

  // per-node interpolation stencils (clamped to the table)
  Eigen::MatrixXi base(n, n);
  std::vector<Eigen::MatrixXd> w(4, Eigen::MatrixXd(n, n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double D = prof.depth(Vec2(f.grid.xat(i), f.grid.xat(j)));
      double u = (D - dlo) / dd;
      int b = std::clamp(static_cast<int>(std::floor(u)), 1, m - 3);
      auto cw = cr4(u - b);
      base(i, j) = b - 1;
      for (int q = 0; q < 4; ++q) w[q](i, j) = cw[q];
    }

  Eigen::MatrixXcd fhat = f.v;
  fft2(fhat, FFTW_FORWARD);

  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);   // T f
  Eigen::MatrixXcd accT = Eigen::MatrixXcd::Zero(n, n);  // T^dagger f
  Eigen::MatrixXd mult(n, n);
  Eigen::MatrixXcd work(n, n);
  for (int t = 0; t < m; ++t) {
    const double Dt = dlo + t * dd;
    for (int kj = 0; kj < n; ++kj)
      for (int ki = 0; ki < n; ++ki) {
        const double mv =
            F(Dt, std::hypot(f.grid.pat(ki), f.grid.pat(kj)));
        if (!std::isfinite(mv)) throw std::runtime_error("symbol non-finite on lattice");
        mult(ki, kj) = mv;
      }
    // weight field c_t(x) for this table node
    Eigen::MatrixXd ct = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int q = t - base(i, j);
        if (q >= 0 && q < 4) ct(i, j) = w[q](i, j);
      }
    if (ct.cwiseAbs().maxCoeff() == 0.0) continue;
    // T: weight after multiplier
    work = mult.cast<cdouble>().cwiseProduct(fhat);
    fft2(work, FFTW_BACKWARD);
    acc += ct.cast<cdouble>().cwiseProduct(work);
    // T^dagger: weight before multiplier
    work = ct.cast<cdouble>().cwiseProduct(f.v);
    fft2(work, FFTW_FORWARD);
    work = mult.cast<cdouble>().cwiseProduct(work);
    fft2(work, FFTW_BACKWARD);
    accT += work;
  }
  GridField2 out{f.grid, 0.5 * (acc + accT)};
  return out;
}

// Direct per-x synthesis for general symbols, O(N^4): small grids only.
GridField2 apply_general(const GridField2& f,
                         const std::function<double(const Vec2&, const Vec2&)>& a) {
  const int n = f.grid.n;
  if (n > 128) throw DomainError("general-symbol synthesis capped at N = 128");
  Eigen::MatrixXcd fhat = f.v;
  fft2(fhat, FFTW_FORWARD);
  const double inv = 1.0 / (double(n) * n);

  // unit phases omega^k = exp(2 pi i k / n)
  Eigen::VectorXcd om(n);
  for (int k = 0; k < n; ++k)
    om[k] = std::exp(cdouble(0, 2.0 * M_PI * k / n));

  GridField2 opf = GridField2::zero(f.grid);   // Op(a) f
  GridField2 opt = GridField2::zero(f.grid);   // Op(a)^T f  (a real => adjoint)
  Eigen::MatrixXcd vhat = Eigen::MatrixXcd::Zero(n, n);
  std::mutex vhat_mutex;

  io::parallel_for(n, [&](std::int64_t j) {
    Eigen::MatrixXcd vloc = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      const Vec2 x(f.grid.xat(int(i)), f.grid.xat(int(j)));
      cdouble s = 0;
      for (int kj = 0; kj < n; ++kj)
        for (int ki = 0; ki < n; ++ki) {
          const double av = a(x, Vec2(f.grid.pat(ki), f.grid.pat(kj)));
          if (!std::isfinite(av))
            throw std::runtime_error("symbol non-finite on lattice");
          const cdouble ph = om[(size_t(i) * ki + size_t(j) * kj) % n];
          s += av * fhat(ki, kj) * ph;
          vloc(ki, kj) += av * f.v(i, int(j)) * ph;
        }
      opf.v(i, int(j)) = inv * s;
    }
    std::lock_guard<std::mutex> lock(vhat_mutex);
    vhat += vloc;
  });
  // Op(a)^T f(x) = (1/N^2) sum_k omega^{+k.x} vhat_k with vhat as accumulated;
  // that is an inverse-order DFT: reuse fft2 by conjugation.
  vhat = vhat.conjugate();
  fft2(vhat, FFTW_BACKWARD);
  opt.v = vhat.conjugate();
  GridField2 out{f.grid, 0.5 * (opf.v + opt.v)};
  return out;
}

}  // namespace

GridField2 apply_symbol(const Symbol& sym, const GridField2& f) {
  switch (sym.kind_) {
    case Symbol::Kind::XIndependent:
      return apply_multiplier(f, sym.fp_);
    case Symbol::Kind::DepthRadial:
      if (sym.prof_->is_constant()) {
        const double D0 = sym.prof_->D0();
        auto F = sym.fD_;
        return apply_multiplier(f, [F, D0](const Vec2& p) { return F(D0, p.norm()); });
      }
      return apply_depth_table(f, *sym.prof_, sym.fD_);
    case Symbol::Kind::General:
      return apply_general(f, sym.fxp_);
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXcd apply_symbol_1d(const Eigen::VectorXcd& f, double X, double h,
                                 const std::function<double(double, double)>& a1d) {
  const int n = static_cast<int>(f.size());
  if (n < 8) throw DomainError("1-D field too small");
  const double dx = 2.0 * X / n;
  Eigen::VectorXcd fhat = f;
  fft1(fhat, FFTW_FORWARD);

  Eigen::VectorXcd om(n);
  for (int k = 0; k < n; ++k)
    om[k] = std::exp(cdouble(0, 2.0 * M_PI * k / n));

  // Op(a) f(x_i) = (1/N) sum_k a(x_i, p_k) fhat_k omega^{ik};
  // the transpose is applied by the reversed-order sums.
  Eigen::VectorXcd opf(n), vhat = Eigen::VectorXcd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double x = -X + i * dx;
    cdouble s = 0;
    for (int k = 0; k < n; ++k) {
      const int ks = k < n / 2 ? k : k - n;
      const double av = a1d(x, h * (M_PI / X) * ks);
      if (!std::isfinite(av)) throw std::runtime_error("symbol non-finite on lattice");
      const cdouble ph = om[(size_t(i) * k) % n];
      s += av * fhat[k] * ph;
      vhat[k] += av * f[i] * ph;
    }
    opf[i] = s / double(n);
  }
  vhat = vhat.conjugate();
  fft1(vhat, FFTW_BACKWARD);
  return 0.5 * (opf + vhat.conjugate());
}

namespace {

// Restarted GMRES with right preconditioning; returns true on convergence and
// records the relative-residual history.
bool gmres(const std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>& Aop,
           const std::function<void(Eigen::VectorXcd&)>& MInv,
           const Eigen::VectorXcd& b, Eigen::VectorXcd& x, double tol,
           int max_iter, std::vector<double>& history) {
  const auto n = b.size();
  const int restart = 60;
  const double bnorm = b.norm();
  if (bnorm == 0) {
    x.setZero(n);
    return true;
  }
  x.setZero(n);
  Eigen::VectorXcd r = b, w(n), z(n);
  int total = 0;
  while (total < max_iter) {
    const double beta = r.norm();
    history.push_back(beta / bnorm);
    if (beta / bnorm <= tol) return true;
    const int mdim = std::min(restart, max_iter - total);
    Eigen::MatrixXcd V(n, mdim + 1);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(mdim + 1, mdim);
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(mdim + 1);
    std::vector<cdouble> cs(mdim), sn(mdim);
    V.col(0) = r / beta;
    g[0] = beta;
    int k = 0;
    for (; k < mdim; ++k, ++total) {
      z = V.col(k);
      MInv(z);
      Aop(z, w);
      for (int i = 0; i <= k; ++i) {  // modified Gram-Schmidt
        H(i, k) = V.col(i).dot(w);
        w -= H(i, k) * V.col(i);
      }
      H(k + 1, k) = w.norm();
      if (std::abs(H(k + 1, k)) > 1e-300) V.col(k + 1) = w / H(k + 1, k);
      for (int i = 0; i < k; ++i) {  // apply stored Givens rotations
        const cdouble t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -std::conj(sn[i]) * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(std::abs(H(k, k)), std::abs(H(k + 1, k)));
      cs[k] = std::abs(H(k, k)) / denom;
      sn[k] = (std::abs(H(k, k)) > 0 ? H(k, k) / std::abs(H(k, k)) : 1.0) *
              std::conj(H(k + 1, k)) / denom;
      H(k, k) = cs[k] * H(k, k) + sn[k] * H(k + 1, k);
      H(k + 1, k) = 0;
      g[k + 1] = -std::conj(sn[k]) * g[k];
      g[k] = cs[k] * g[k];
      history.push_back(std::abs(g[k + 1]) / bnorm);
      if (std::abs(g[k + 1]) / bnorm <= tol) {
        ++k;
        ++total;
        break;
      }
    }
    // back-substitute and update
    Eigen::VectorXcd y(k);
    for (int i = k - 1; i >= 0; --i) {
      cdouble s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
      y[i] = s / H(i, i);
    }
    z = V.leftCols(k) * y;
    MInv(z);
    x += z;
    // true residual for restart / exit decision
    Aop(x, w);
    r = b - w;
    if (r.norm() / bnorm <= tol) {
      history.push_back(r.norm() / bnorm);
      return true;
    }
  }
  history.push_back(r.norm() / bnorm);
  return false;
}

}  // namespace

GridField2 resolvent_solve(const DepthProfile& prof, const GridField2& f,
                           const ResolventQuery& query, bool conj) {
  if (!(query.eps > 0)) throw DomainError("resolvent solve needs eps > 0");
  const cdouble shift(query.E, conj ? -query.eps : query.eps);
  const int n = f.grid.n;

  if (prof.is_constant()) {
    const double D0 = prof.D0();
    GridField2 out = f;
    fft2(out.v, FFTW_FORWARD);
    for (int kj = 0; kj < n; ++kj)
      for (int ki = 0; ki < n; ++ki) {
        const double L0 = dispersion::surface_symbol_radial(
            D0, std::hypot(f.grid.pat(ki), f.grid.pat(kj)));
        out.v(ki, kj) /= (L0 - shift);
      }
    fft2(out.v, FFTW_BACKWARD);
    return out;
  }

  const Symbol sym = surface_symbol_op(prof);
  const double Dref = prof.D0();
  auto Aop = [&](const Eigen::VectorXcd& vin, Eigen::VectorXcd& vout) {
    GridField2 g{f.grid, Eigen::Map<const Eigen::MatrixXcd>(vin.data(), n, n)};
    GridField2 Lg = apply_symbol(sym, g);
    vout = Eigen::Map<Eigen::VectorXcd>(Lg.v.data(), size_t(n) * n) -
           shift * vin;
  };
  auto MInv = [&](Eigen::VectorXcd& v) {
    Eigen::Map<Eigen::MatrixXcd> m(v.data(), n, n);
    Eigen::MatrixXcd w = m;
    fft2(w, FFTW_FORWARD);
    for (int kj = 0; kj < n; ++kj)
      for (int ki = 0; ki < n; ++ki) {
        const double L0 = dispersion::surface_symbol_radial(
            Dref, std::hypot(f.grid.pat(ki), f.grid.pat(kj)));
        w(ki, kj) /= (L0 - shift);
      }
    fft2(w, FFTW_BACKWARD);
    m = w;
  };

  Eigen::VectorXcd b = Eigen::Map<const Eigen::VectorXcd>(f.v.data(), size_t(n) * n);
  Eigen::VectorXcd x;
  std::vector<double> history;
  const bool ok = gmres(Aop, MInv, b, x, query.tol, query.max_iter, history);
  if (!ok)
    throw NonConvergenceError("resolvent GMRES hit the iteration cap",
                              history.back(), history);
  GridField2 out{f.grid, Eigen::Map<Eigen::MatrixXcd>(x.data(), n, n)};
  return out;
}

ScalingReport weighted_resolvent_norm(const DepthProfile& prof,
                                      const ResolventQuery& query,
                                      const std::vector<double>& hs,
                                      const WeightedNormOptions& opts) {
  if (!(query.s > 0.5))
    throw DomainError("weighted resolvent norm needs weight exponent s > 1/2");
  if (hs.size() < 2) throw DomainError("need at least two h values");

  ScalingReport rep;
  rep.hs = hs;
  const double pref =
      dispersion::normal_form(prof, Vec2::Zero(), query.E).r;

  for (double h : hs) {
    // smallest power-of-two grid resolving the characteristic wavelength
    int n = 8;
    while (Grid2(opts.X, n, h).nodes_per_wavelength(pref) <
           opts.min_nodes_per_wavelength)
      n *= 2;
    Grid2 grid(opts.X, n, h);
    const double eps = opts.eps_of_h ? opts.eps_of_h(h) : h * h;
    ResolventQuery q = query;
    q.eps = eps;

    Eigen::MatrixXd weight(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double r2 = grid.xat(i) * grid.xat(i) + grid.xat(j) * grid.xat(j);
        weight(i, j) = std::pow(1.0 + r2, -0.5 * query.s);
      }

    auto applyB = [&](const GridField2& v, bool adjoint) {
      GridField2 w{grid, weight.cast<cdouble>().cwiseProduct(v.v)};
      GridField2 u = resolvent_solve(prof, w, q, adjoint);
      u.v = weight.cast<cdouble>().cwiseProduct(u.v);
      return u;
    };

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss;
    GridField2 v = GridField2::zero(grid);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) v.v(i, j) = cdouble(gauss(rng), gauss(rng));
    v.v /= v.v.norm();

    double mu = 0;
    std::vector<double> mus;
    bool converged = false;
    for (int it = 0; it < opts.power_max_iter; ++it) {
      GridField2 Bv = applyB(v, false);
      GridField2 BtBv = applyB(Bv, true);
      const double nn = BtBv.v.norm();
      if (nn == 0) throw std::runtime_error("power iteration collapsed to zero");
      const double mu_new = nn;  // Rayleigh growth factor for ||B^*B||
      mus.push_back(std::sqrt(mu_new));
      v.v = BtBv.v / nn;
      if (it > 2 && std::abs(mu_new - mu) <= opts.power_tol * mu_new) {
        mu = mu_new;
        converged = true;
        break;
      }
      mu = mu_new;
    }
    if (!converged)
      throw NonConvergenceError("power iteration stagnation", std::sqrt(mu), mus);
    rep.norms.push_back(std::sqrt(mu));
    rep.eps_used.push_back(eps);
  }

  std::vector<double> lx, ly;
  for (size_t i = 0; i < hs.size(); ++i) {
    lx.push_back(std::log(1.0 / hs[i]));
    ly.push_back(std::log(rep.norms[i]));
  }
  rep.slope = io::fit_slope(lx, ly);
  return rep;
}

}  // namespace wgf::pdo
