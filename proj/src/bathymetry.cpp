#include "wavegreen/bathymetry.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

namespace wgf {

namespace {

// Catmull-Rom weights for t in [0,1] over nodes f[-1..2], and derivatives.
inline void cr_weights(double t, double w[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2 * t2 - t);
  w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
  w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
}
inline void cr_dweights(double t, double w[4]) {
  const double t2 = t * t;
  w[0] = 0.5 * (-3 * t2 + 4 * t - 1);
  w[1] = 0.5 * (9 * t2 - 10 * t);
  w[2] = 0.5 * (-9 * t2 + 8 * t + 1);
  w[3] = 0.5 * (3 * t2 - 2 * t);
}
inline void cr_ddweights(double t, double w[4]) {
  w[0] = 0.5 * (-6 * t + 4);
  w[1] = 0.5 * (18 * t - 10);
  w[2] = 0.5 * (-18 * t + 8);
  w[3] = 0.5 * (6 * t - 2);
}

}  // namespace

DepthProfile DepthProfile::constant(double D0) {
  if (D0 <= 0) throw ValidityError("constant profile needs D0 > 0");
  DepthProfile p;
  p.kind_ = ProfileKind::Constant;
  p.D0_ = D0;
  p.d_min_ = 0.05 * D0;
  return p;
}

DepthProfile DepthProfile::radial_bump(double D0, double delta, double ell, Vec2 center) {
  DepthProfile p;
  p.kind_ = ProfileKind::RadialBump;
  p.D0_ = D0;
  p.delta_ = delta;
  p.ell_ = ell;
  p.center_ = center;
  p.d_min_ = 0.05 * D0;
  if (D0 - std::abs(delta) < p.d_min_)
    throw ValidityError("radial bump amplitude drives depth below D_min");
  return p;
}

DepthProfile DepthProfile::sech_trench(double D0, double delta, double ell, Vec2 center) {
  DepthProfile p;
  p.kind_ = ProfileKind::SechTrench;
  p.D0_ = D0;
  p.delta_ = delta;
  p.ell_ = ell;
  p.center_ = center;
  p.d_min_ = 0.05 * D0;
  if (D0 - std::abs(delta) < p.d_min_)
    throw ValidityError("trench amplitude drives depth below D_min");
  return p;
}

DepthProfile DepthProfile::gridded(Eigen::MatrixXd samples, double x0, double y0,
                                   double dx, double dy, double D0) {
  if (samples.rows() < 4 || samples.cols() < 4)
    throw ValidityError("gridded profile needs at least 4x4 nodes");
  if (dx <= 0 || dy <= 0) throw ValidityError("grid spacings must be positive");
  DepthProfile p;
  p.kind_ = ProfileKind::Gridded;
  p.D0_ = D0;
  p.d_min_ = 0.05 * D0;
  p.gx0_ = x0;
  p.gy0_ = y0;
  p.gdx_ = dx;
  p.gdy_ = dy;
  p.grid_ = std::move(samples);
  // one-cell margin: the cubic stencil needs a neighbor node on each side
  p.box_ = {x0 + dx, x0 + (p.grid_.rows() - 2) * dx,
            y0 + dy, y0 + (p.grid_.cols() - 2) * dy};
  if (p.grid_.minCoeff() <= 0)
    throw ValidityError("gridded profile has nonpositive depth samples");
  return p;
}

DepthProfile DepthProfile::from_csv(const std::string& path, double D0) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open profile CSV: " + path);
  std::map<double, std::map<double, double>> rows;  // x -> (y -> depth)
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    double x, y, d;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &d) != 3)
      throw ValidityError("bad CSV row: " + line);
    rows[x][y] = d;
  }
  const int nx = static_cast<int>(rows.size());
  if (nx < 4) throw ValidityError("CSV grid too small");
  const int ny = static_cast<int>(rows.begin()->second.size());
  Eigen::MatrixXd g(nx, ny);
  std::vector<double> xs, ys;
  for (auto& [x, col] : rows) xs.push_back(x);
  for (auto& [y, d] : rows.begin()->second) ys.push_back(y);
  int i = 0;
  for (auto& [x, col] : rows) {
    if (static_cast<int>(col.size()) != ny)
      throw ValidityError("CSV grid is not complete");
    int j = 0;
    for (auto& [y, d] : col) g(i, j++) = d;
    ++i;
  }
  return gridded(std::move(g), xs.front(), ys.front(), xs[1] - xs[0], ys[1] - ys[0], D0);
}

DepthProfile DepthProfile::from_raster(const std::string& raw_path,
                                       const std::string& json_path) {
  std::ifstream meta(json_path);
  if (!meta) throw DomainError("cannot open sidecar: " + json_path);
  nlohmann::json j;
  meta >> j;
  const int nx = j.at("nx"), ny = j.at("ny");
  Eigen::MatrixXd g(nx, ny);
  std::ifstream raw(raw_path, std::ios::binary);
  if (!raw) throw DomainError("cannot open raster: " + raw_path);
  raw.read(reinterpret_cast<char*>(g.data()), sizeof(double) * nx * ny);
  if (!raw) throw ValidityError("raster shorter than nx*ny float64 values");
  // row-major on disk (x fastest in j), Eigen is column-major: stored as g(i,j)
  // with i the x index; the writer uses the same convention (see io.cpp).
  return gridded(std::move(g), j.at("x0"), j.at("y0"), j.at("dx"), j.at("dy"),
                 j.at("D0"));
}

void DepthProfile::validate(double d, const Vec2& x) const {
  if (!(d > 0))
    throw ValidityError("nonpositive depth at (" + std::to_string(x[0]) + "," +
                        std::to_string(x[1]) + ")");
}

double DepthProfile::depth(const Vec2& x) const {
  switch (kind_) {
    case ProfileKind::Constant:
      return D0_;
    case ProfileKind::RadialBump: {
      const double r2 = (x - center_).squaredNorm();
      return D0_ - delta_ * std::exp(-r2 / (ell_ * ell_));
    }
    case ProfileKind::SechTrench: {
      const double s = 1.0 / std::cosh((x[1] - center_[1]) / ell_);
      return D0_ - delta_ * s * s;
    }
    case ProfileKind::Gridded: {
      if (!box_.contains(x))
        throw DomainError("gridded profile evaluated outside its box");
      const double fx = (x[0] - gx0_) / gdx_, fy = (x[1] - gy0_) / gdy_;
      int i = static_cast<int>(std::floor(fx)), jj = static_cast<int>(std::floor(fy));
      i = std::min(std::max(i, 1), static_cast<int>(grid_.rows()) - 3);
      jj = std::min(std::max(jj, 1), static_cast<int>(grid_.cols()) - 3);
      double wx[4], wy[4];
      cr_weights(fx - i, wx);
      cr_weights(fy - jj, wy);
      double d = 0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) d += wx[a] * wy[b] * grid_(i - 1 + a, jj - 1 + b);
      validate(d, x);
      return d;
    }
  }
  throw std::logic_error("unreachable");
}

Vec2 DepthProfile::grad_depth(const Vec2& x) const {
  switch (kind_) {
    case ProfileKind::Constant:
      return Vec2::Zero();
    case ProfileKind::RadialBump: {
      const Vec2 y = x - center_;
      const double e = std::exp(-y.squaredNorm() / (ell_ * ell_));
      return (2.0 * delta_ / (ell_ * ell_)) * e * y;
    }
    case ProfileKind::SechTrench: {
      const double u = (x[1] - center_[1]) / ell_;
      const double s = 1.0 / std::cosh(u), t = std::tanh(u);
      return Vec2(0.0, 2.0 * delta_ * s * s * t / ell_);
    }
    case ProfileKind::Gridded: {
      if (!box_.contains(x))
        throw DomainError("gridded profile evaluated outside its box");
      const double fx = (x[0] - gx0_) / gdx_, fy = (x[1] - gy0_) / gdy_;
      int i = static_cast<int>(std::floor(fx)), jj = static_cast<int>(std::floor(fy));
      i = std::min(std::max(i, 1), static_cast<int>(grid_.rows()) - 3);
      jj = std::min(std::max(jj, 1), static_cast<int>(grid_.cols()) - 3);
      double wx[4], wy[4], dwx[4], dwy[4];
      cr_weights(fx - i, wx);
      cr_weights(fy - jj, wy);
      cr_dweights(fx - i, dwx);
      cr_dweights(fy - jj, dwy);
      Vec2 g = Vec2::Zero();
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          const double v = grid_(i - 1 + a, jj - 1 + b);
          g[0] += dwx[a] * wy[b] * v;
          g[1] += wx[a] * dwy[b] * v;
        }
      g[0] /= gdx_;
      g[1] /= gdy_;
      return g;
    }
  }
  throw std::logic_error("unreachable");
}

Mat2 DepthProfile::hess_depth(const Vec2& x) const {
  switch (kind_) {
    case ProfileKind::Constant:
      return Mat2::Zero();
    case ProfileKind::RadialBump: {
      const Vec2 y = x - center_;
      const double l2 = ell_ * ell_;
      const double e = std::exp(-y.squaredNorm() / l2);
      Mat2 H = (2.0 * delta_ / l2) * e * (Mat2::Identity() - (2.0 / l2) * y * y.transpose());
      return H;
    }
    case ProfileKind::SechTrench: {
      const double u = (x[1] - center_[1]) / ell_;
      const double s = 1.0 / std::cosh(u), t = std::tanh(u);
      Mat2 H = Mat2::Zero();
      // d/du [2 delta s^2 t] = 2 delta (s^4 - 2 s^2 t^2) ... worked out below
      H(1, 1) = 2.0 * delta_ * (s * s * s * s - 2.0 * s * s * t * t) / (ell_ * ell_);
      return H;
    }
    case ProfileKind::Gridded: {
      if (!box_.contains(x))
        throw DomainError("gridded profile evaluated outside its box");
      const double fx = (x[0] - gx0_) / gdx_, fy = (x[1] - gy0_) / gdy_;
      int i = static_cast<int>(std::floor(fx)), jj = static_cast<int>(std::floor(fy));
      i = std::min(std::max(i, 1), static_cast<int>(grid_.rows()) - 3);
      jj = std::min(std::max(jj, 1), static_cast<int>(grid_.cols()) - 3);
      double wx[4], wy[4], dwx[4], dwy[4], ddwx[4], ddwy[4];
      cr_weights(fx - i, wx);
      cr_weights(fy - jj, wy);
      cr_dweights(fx - i, dwx);
      cr_dweights(fy - jj, dwy);
      cr_ddweights(fx - i, ddwx);
      cr_ddweights(fy - jj, ddwy);
      Mat2 H = Mat2::Zero();
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          const double v = grid_(i - 1 + a, jj - 1 + b);
          H(0, 0) += ddwx[a] * wy[b] * v;
          H(1, 1) += wx[a] * ddwy[b] * v;
          H(0, 1) += dwx[a] * dwy[b] * v;
        }
      H(0, 0) /= gdx_ * gdx_;
      H(1, 1) /= gdy_ * gdy_;
      H(0, 1) /= gdx_ * gdy_;
      H(1, 0) = H(0, 1);
      return H;
    }
  }
  throw std::logic_error("unreachable");
}

std::pair<double, double> DepthProfile::depth_range(double X, int n) const {
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      Vec2 x(-X + 2 * X * i / n, -X + 2 * X * j / n);
      if (kind_ == ProfileKind::Gridded && !box_.contains(x)) continue;
      const double d = depth(x);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  return {lo, hi};
}

DepthProfile::FlatnessReport DepthProfile::flatness_report(
    const std::vector<double>& radii, double declared_rho) const {
  if (radii.size() < 3)
    throw ValidityError("flatness report needs at least 3 radii");
  for (size_t i = 0; i + 1 < radii.size(); ++i)
    if (!(radii[i] > 0) || radii[i + 1] <= radii[i])
      throw ValidityError("radii must be positive and increasing");

  FlatnessReport rep;
  rep.declared_rho = declared_rho;
  const int n_ang = 720;
  for (double r : radii) {
    FlatnessRow row{r, 0, 0, 0, true};
    for (int k = 0; k < n_ang; ++k) {
      const double th = 2 * M_PI * k / n_ang;
      const Vec2 x = center_ + r * Vec2(std::cos(th), std::sin(th));
      if (kind_ == ProfileKind::Gridded && !box_.contains(x)) continue;
      row.sup_dev = std::max(row.sup_dev, std::abs(depth(x) - D0_));
      row.sup_grad = std::max(row.sup_grad, grad_depth(x).norm());
      row.sup_hess = std::max(row.sup_hess, hess_depth(x).norm());
    }
    rep.rows.push_back(row);
  }

  // log-log fit of sup|D-D0| vs radius (rows with nonzero sup only)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (auto& row : rep.rows)
    if (row.sup_dev > 0) {
      const double lx = std::log(row.radius), ly = std::log(row.sup_dev);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++n;
    }
  rep.rho_hat = (n >= 2) ? -(n * sxy - sx * sy) / (n * sxx - sx * sx)
                         : std::numeric_limits<double>::infinity();

  // the declared long-range rate holds if <r>^{|a|+rho} * sup is nonincreasing
  rep.long_range_ok = true;
  auto w = [](double r) { return std::sqrt(1 + r * r); };
  for (size_t i = 1; i < rep.rows.size(); ++i) {
    const auto &a = rep.rows[i - 1], &b = rep.rows[i];
    const double slack = 1.05;
    bool ok =
        b.sup_dev * std::pow(w(b.radius), declared_rho) <=
            slack * a.sup_dev * std::pow(w(a.radius), declared_rho) &&
        b.sup_grad * std::pow(w(b.radius), 1 + declared_rho) <=
            slack * a.sup_grad * std::pow(w(a.radius), 1 + declared_rho) &&
        b.sup_hess * std::pow(w(b.radius), 2 + declared_rho) <=
            slack * a.sup_hess * std::pow(w(a.radius), 2 + declared_rho);
    rep.rows[i].weighted_ok = ok;
    rep.long_range_ok = rep.long_range_ok && ok;
  }
  return rep;
}

}  // namespace wgf
