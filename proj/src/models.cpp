// SPDX-License-Identifier: Apache-2.0
#include "stlspg/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace stlspg {

// ---------------------------------------------------------------------------
// Base-class fallbacks
// ---------------------------------------------------------------------------

Matrix SemiDiscreteModel::velocity_jacobian(const Vector& w, double t,
                                            const Vector& mu) const {
  const Index n = dim();
  const Vector f0 = velocity(w, t, mu);
  Matrix J(n, n);
  Vector wp = w;
  for (Index j = 0; j < n; ++j) {
    const double h = 1e-7 * std::max(1.0, std::abs(w(j)));
    wp(j) = w(j) + h;
    J.col(j) = (velocity(wp, t, mu) - f0) / h;
    wp(j) = w(j);
  }
  return J;
}

std::vector<Index> SemiDiscreteModel::velocity_stencil(Index component) const {
  require(component >= 0 && component < dim(), "component out of range");
  std::vector<Index> all(static_cast<std::size_t>(dim()));
  for (Index i = 0; i < dim(); ++i) all[static_cast<std::size_t>(i)] = i;
  return all;
}

void SemiDiscreteModel::velocity_components(const Vector& w, double t,
                                            const Vector& mu,
                                            const std::vector<Index>& comps,
                                            Vector& out) const {
  const Vector f = velocity(w, t, mu);  // counts the full dimension
  out.resize(static_cast<Index>(comps.size()));
  for (std::size_t i = 0; i < comps.size(); ++i)
    out(static_cast<Index>(i)) = f(comps[i]);
}

void SemiDiscreteModel::velocity_jacobian_rows(const Vector& w, double t,
                                               const Vector& mu,
                                               const std::vector<Index>& comps,
                                               Matrix& out) const {
  std::set<Index> closure;
  for (Index c : comps)
    for (Index j : velocity_stencil(c)) closure.insert(j);
  out = Matrix::Zero(static_cast<Index>(comps.size()), dim());
  Vector f0, f1;
  velocity_components(w, t, mu, comps, f0);
  Vector wp = w;
  for (Index j : closure) {
    const double h = 1e-7 * std::max(1.0, std::abs(w(j)));
    wp(j) = w(j) + h;
    velocity_components(wp, t, mu, comps, f1);
    wp(j) = w(j);
    out.col(j) = (f1 - f0) / h;
  }
}

void SemiDiscreteModel::check_parameters(const Vector& mu) const {
  const Matrix box = parameter_domain();
  require(mu.size() == box.rows(),
          label() + ": expected " + std::to_string(box.rows()) +
              " parameters, got " + std::to_string(mu.size()));
  for (Index i = 0; i < mu.size(); ++i) {
    if (mu(i) < box(i, 0) || mu(i) > box(i, 1)) {
      std::ostringstream msg;
      msg << label() << ": parameter " << i + 1 << " = " << mu(i)
          << " outside [" << box(i, 0) << ", " << box(i, 1) << "]";
      warn(msg.str());
    }
  }
}

// ---------------------------------------------------------------------------
// Parameterized inviscid Burgers equation, Godunov finite volumes
// ---------------------------------------------------------------------------

namespace {

inline double burgers_flux(double w) { return 0.5 * w * w; }

// Exact Riemann (Godunov) flux for the convex flux w^2/2.
inline double godunov_flux(double wl, double wr) {
  if (wl <= wr) {  // rarefaction
    if (wl >= 0.0) return burgers_flux(wl);
    if (wr <= 0.0) return burgers_flux(wr);
    return 0.0;  // sonic point inside the fan
  }
  return std::max(burgers_flux(wl), burgers_flux(wr));  // shock
}

// Partial derivatives of the Godunov flux w.r.t. its two arguments.
inline void godunov_flux_gradient(double wl, double wr, double& dl,
                                  double& dr) {
  dl = 0.0;
  dr = 0.0;
  if (wl <= wr) {
    if (wl >= 0.0)
      dl = wl;
    else if (wr <= 0.0)
      dr = wr;
  } else {
    if (burgers_flux(wl) >= burgers_flux(wr))
      dl = wl;
    else
      dr = wr;
  }
}

class BurgersModel final : public SemiDiscreteModel {
 public:
  BurgersModel(Index n_cells, double source_amplitude)
      : n_(n_cells), amp_(source_amplitude), dx_(1.0 / double(n_cells)) {
    require(n_ >= 2, "need at least two cells");
  }

  Index dim() const override { return n_; }
  std::string label() const override { return "burgers"; }
  Index parameter_dim() const override { return 2; }

  Matrix parameter_domain() const override {
    Matrix box(2, 2);
    box << 1.2, 1.5, 0.02, 0.025;
    return box;
  }

  Vector initial_state(const Vector&) const override {
    return Vector::Ones(n_);
  }

  Vector velocity(const Vector& w, double, const Vector& mu) const override {
    require(w.size() == n_, "state dimension mismatch");
    require(mu.size() == 2, "burgers expects two parameters");
    count_components(static_cast<std::uint64_t>(n_));
    Vector v(n_);
    // face i sits between cells i-1 and i; face 0 is the inflow boundary.
    double f_left = godunov_flux(mu(0), w(0));
    for (Index i = 0; i < n_; ++i) {
      const double f_right =
          (i + 1 < n_) ? godunov_flux(w(i), w(i + 1)) : burgers_flux(w(i));
      v(i) = (f_left - f_right) / dx_ + source(i, mu);
      f_left = f_right;
    }
    return v;
  }

  Matrix velocity_jacobian(const Vector& w, double,
                           const Vector& mu) const override {
    require(w.size() == n_, "state dimension mismatch");
    Matrix J = Matrix::Zero(n_, n_);
    double dl, dr;
    // inflow face: only the wr-derivative touches the state
    godunov_flux_gradient(mu(0), w(0), dl, dr);
    double dface_left = dr;  // d f_{1/2} / d w_0
    for (Index i = 0; i < n_; ++i) {
      double dFr_dwi, dFr_dwip;
      if (i + 1 < n_) {
        godunov_flux_gradient(w(i), w(i + 1), dFr_dwi, dFr_dwip);
      } else {
        dFr_dwi = w(i);  // outflow face flux = f(w_{n-1})
        dFr_dwip = 0.0;
      }
      // v_i = (f_left - f_right)/dx; f_left depends on w_{i-1}, w_i
      if (i > 0) {
        double a, b;
        godunov_flux_gradient(w(i - 1), w(i), a, b);
        J(i, i - 1) += a / dx_;
        J(i, i) += b / dx_;
      } else {
        J(i, i) += dface_left / dx_;
      }
      J(i, i) -= dFr_dwi / dx_;
      if (i + 1 < n_) J(i, i + 1) -= dFr_dwip / dx_;
    }
    return J;
  }

  std::vector<Index> velocity_stencil(Index c) const override {
    require(c >= 0 && c < n_, "component out of range");
    std::vector<Index> s;
    if (c > 0) s.push_back(c - 1);
    s.push_back(c);
    if (c + 1 < n_) s.push_back(c + 1);
    return s;
  }

  void velocity_components(const Vector& w, double, const Vector& mu,
                           const std::vector<Index>& comps,
                           Vector& out) const override {
    count_components(comps.size());
    out.resize(static_cast<Index>(comps.size()));
    for (std::size_t q = 0; q < comps.size(); ++q) {
      const Index i = comps[q];
      const double fl =
          (i == 0) ? godunov_flux(mu(0), w(0)) : godunov_flux(w(i - 1), w(i));
      const double fr =
          (i + 1 < n_) ? godunov_flux(w(i), w(i + 1)) : burgers_flux(w(i));
      out(static_cast<Index>(q)) = (fl - fr) / dx_ + source(i, mu);
    }
  }

  void velocity_jacobian_rows(const Vector& w, double, const Vector& mu,
                              const std::vector<Index>& comps,
                              Matrix& out) const override {
    out = Matrix::Zero(static_cast<Index>(comps.size()), n_);
    for (std::size_t q = 0; q < comps.size(); ++q) {
      const Index i = comps[q];
      const Index r = static_cast<Index>(q);
      double dl, dr;
      if (i == 0) {
        godunov_flux_gradient(mu(0), w(0), dl, dr);
        out(r, 0) += dr / dx_;
      } else {
        godunov_flux_gradient(w(i - 1), w(i), dl, dr);
        out(r, i - 1) += dl / dx_;
        out(r, i) += dr / dx_;
      }
      if (i + 1 < n_) {
        godunov_flux_gradient(w(i), w(i + 1), dl, dr);
        out(r, i) -= dl / dx_;
        out(r, i + 1) -= dr / dx_;
      } else {
        out(r, i) -= w(i) / dx_;
      }
    }
  }

 private:
  double source(Index i, const Vector& mu) const {
    const double x = (double(i) + 0.5) * dx_;
    return amp_ * std::exp(mu(1) * x);
  }

  Index n_;
  double amp_;
  double dx_;
};

}  // namespace

std::unique_ptr<SemiDiscreteModel> make_burgers(Index n_cells,
                                                double source_amplitude) {
  return std::make_unique<BurgersModel>(n_cells, source_amplitude);
}

double burgers_godunov_flux(double w_left, double w_right) {
  return godunov_flux(w_left, w_right);
}

// ---------------------------------------------------------------------------
// Quasi-1D Euler flow through a converging-diverging nozzle, Roe fluxes
// ---------------------------------------------------------------------------

namespace euler_detail {

constexpr double kGamma = 1.3;
constexpr double kGasConstant = 355.4;    // J/(kg K)
constexpr double kTotalTemperature = 300.0;  // K
constexpr double kTotalPressure = 1e6;       // Pa
constexpr double kShockLocation = 0.85;
constexpr double kThroatLocation = 0.5;

struct Primitive {
  double rho;
  double u;
  double p;
};

inline Vector conservative(const Primitive& q) {
  Vector w(3);
  w(0) = q.rho;
  w(1) = q.rho * q.u;
  w(2) = q.p / (kGamma - 1.0) + 0.5 * q.rho * q.u * q.u;
  return w;
}

inline Primitive primitive(double rho, double rhou, double e, Index cell) {
  if (!(rho > 0.0))
    fail("cell " + std::to_string(cell) + ": nonpositive density");
  Primitive q;
  q.rho = rho;
  q.u = rhou / rho;
  q.p = (kGamma - 1.0) * (e - 0.5 * rho * q.u * q.u);
  if (!(q.p > 0.0))
    fail("cell " + std::to_string(cell) + ": nonpositive pressure");
  return q;
}

inline Vector physical_flux(const Primitive& q, double e) {
  Vector F(3);
  F(0) = q.rho * q.u;
  F(1) = q.rho * q.u * q.u + q.p;
  F(2) = (e + q.p) * q.u;
  return F;
}

// Roe flux with a Harten-type entropy fix (delta = 0.05 * Roe sound speed)
// applied to the acoustic waves.
Vector roe_flux(const Vector& wl, const Vector& wr, Index face) {
  const Primitive ql = primitive(wl(0), wl(1), wl(2), face - 1);
  const Primitive qr = primitive(wr(0), wr(1), wr(2), face);
  const double el = wl(2);
  const double er = wr(2);
  const double Hl = (el + ql.p) / ql.rho;
  const double Hr = (er + qr.p) / qr.rho;

  const double sl = std::sqrt(ql.rho);
  const double sr = std::sqrt(qr.rho);
  const double u = (sl * ql.u + sr * qr.u) / (sl + sr);
  const double H = (sl * Hl + sr * Hr) / (sl + sr);
  const double c2 = (kGamma - 1.0) * (H - 0.5 * u * u);
  if (!(c2 > 0.0))
    fail("face " + std::to_string(face) + ": Roe sound speed undefined");
  const double c = std::sqrt(c2);

  const double d1 = wr(0) - wl(0);
  const double d2 = wr(1) - wl(1);
  const double d3 = wr(2) - wl(2);

  // wave strengths
  const double a2 =
      (kGamma - 1.0) / c2 * (d1 * (H - u * u) + u * d2 - d3);
  const double a1 = (d1 * (u + c) - d2 - c * a2) / (2.0 * c);
  const double a3 = d1 - a1 - a2;

  double l1 = u - c, l2 = u, l3 = u + c;
  // Entropy-fix width: 0.3 c keeps the implicit operator well conditioned
  // when sonic points (u - c ~ 0) and strong startup jumps sit inside the
  // domain; narrower fixes starve the acoustic dissipation there and the
  // backward-Euler steps of the shocked startup transient develop non-root
  // stationary points that stall any residual-descent Newton variant.
  const double delta = 0.3 * c;
  auto fix = [delta](double lam) {
    const double a = std::abs(lam);
    return (a < delta) ? (lam * lam + delta * delta) / (2.0 * delta) : a;
  };
  l1 = fix(l1);
  l3 = fix(l3);
  l2 = std::abs(l2);

  Vector r1(3), r2(3), r3(3);
  r1 << 1.0, u - c, H - u * c;
  r2 << 1.0, u, 0.5 * u * u;
  r3 << 1.0, u + c, H + u * c;

  const Vector Fl = physical_flux(ql, el);
  const Vector Fr = physical_flux(qr, er);
  return 0.5 * (Fl + Fr) -
         0.5 * (a1 * l1 * r1 + a2 * l2 * r2 + a3 * l3 * r3);
}

// Isentropic primitives at Mach number M from stagnation conditions.
Primitive isentropic_state(double mach) {
  const double g = kGamma;
  const double factor = 1.0 + 0.5 * (g - 1.0) * mach * mach;
  Primitive q;
  q.p = kTotalPressure * std::pow(factor, -g / (g - 1.0));
  const double T = kTotalTemperature / factor;
  q.rho = q.p / (kGasConstant * T);
  const double cs = std::sqrt(g * q.p / q.rho);
  q.u = mach * cs;
  return q;
}

// Exit pressure held by the outflow boundary: the post-shock static
// pressure of the constructed field. The initial condition additionally
// scales the exit cell's pressure by mu_1, so the mismatch between that
// raised cell value and this boundary value launches the transient; the
// boundary itself keeps the original (physically sustainable) pressure.
double boundary_exit_pressure(const Vector& mu) {
  const double A_shock = nozzle_area(kShockLocation);
  const double M1 = area_mach_number(A_shock, mu(1), /*supersonic=*/true,
                                     kGamma);
  const Primitive q1 = isentropic_state(M1);
  const double e1 = q1.p / (kGamma - 1.0) + 0.5 * q1.rho * q1.u * q1.u;
  const double m = q1.rho * q1.u;
  const double n = q1.p + q1.rho * q1.u * q1.u;
  const double h = (e1 + q1.p) / q1.rho;
  const double u2 = shock_downstream_velocity(m, n, h, q1.u, kGamma);
  return n - m * u2;  // p2
}

class EulerNozzleModel final : public SemiDiscreteModel {
 public:
  explicit EulerNozzleModel(Index n_cells)
      : n_(n_cells), dx_(1.0 / double(n_cells)) {
    require(n_ >= 3, "need at least three cells");
    area_face_.resize(n_ + 1);
    area_cell_.resize(n_);
    darea_cell_.resize(n_);
    for (Index i = 0; i <= n_; ++i) area_face_(i) = nozzle_area(double(i) * dx_);
    for (Index i = 0; i < n_; ++i) {
      const double x = (double(i) + 0.5) * dx_;
      area_cell_(i) = nozzle_area(x);
      darea_cell_(i) = nozzle_darea_dx(x);
    }
  }

  Index dim() const override { return 3 * n_; }
  std::string label() const override { return "euler_nozzle"; }
  Index parameter_dim() const override { return 2; }

  Matrix parameter_domain() const override {
    Matrix box(2, 2);
    box << 1.7, 1.73, 1.7, 1.72;
    return box;
  }

  Vector initial_state(const Vector& mu) const override {
    return euler_initial_condition(mu, n_);
  }

  Vector velocity(const Vector& w, double, const Vector& mu) const override {
    require(w.size() == 3 * n_, "state dimension mismatch");
    require(mu.size() == 2, "nozzle expects two parameters");
    count_components(static_cast<std::uint64_t>(3 * n_));
    Matrix flux(3, n_ + 1);
    flux.col(0) = roe_flux(inflow_ghost(w), w.segment(0, 3), 0);
    for (Index f = 1; f < n_; ++f)
      flux.col(f) = roe_flux(w.segment(3 * (f - 1), 3), w.segment(3 * f, 3), f);
    flux.col(n_) = roe_flux(w.segment(3 * (n_ - 1), 3), outflow_ghost(w, mu), n_);

    Vector v(3 * n_);
    for (Index i = 0; i < n_; ++i) {
      v.segment(3 * i, 3) = -(area_face_(i + 1) * flux.col(i + 1) -
                              area_face_(i) * flux.col(i)) /
                            (area_cell_(i) * dx_);
      const Primitive q = primitive(w(3 * i), w(3 * i + 1), w(3 * i + 2), i);
      v(3 * i + 1) += q.p / area_cell_(i) * darea_cell_(i);
    }
    return v;
  }

  std::vector<Index> velocity_stencil(Index comp) const override {
    require(comp >= 0 && comp < 3 * n_, "component out of range");
    const Index c = comp / 3;
    std::vector<Index> s;
    for (Index cc = std::max<Index>(0, c - 1);
         cc <= std::min<Index>(n_ - 1, c + 1); ++cc)
      for (Index k = 0; k < 3; ++k) s.push_back(3 * cc + k);
    return s;
  }

  void velocity_components(const Vector& w, double, const Vector& mu,
                           const std::vector<Index>& comps,
                           Vector& out) const override {
    count_components(comps.size());
    // Evaluate each needed face flux exactly once.
    std::set<Index> faces;
    for (Index comp : comps) {
      const Index c = comp / 3;
      faces.insert(c);
      faces.insert(c + 1);
    }
    std::map<Index, Vector> flux;
    for (Index f : faces) {
      const Vector wl =
          (f == 0) ? inflow_ghost(w) : Vector(w.segment(3 * (f - 1), 3));
      const Vector wr =
          (f == n_) ? outflow_ghost(w, mu) : Vector(w.segment(3 * f, 3));
      flux.emplace(f, roe_flux(wl, wr, f));
    }
    out.resize(static_cast<Index>(comps.size()));
    for (std::size_t q = 0; q < comps.size(); ++q) {
      const Index comp = comps[q];
      const Index c = comp / 3;
      const Index k = comp % 3;
      double val = -(area_face_(c + 1) * flux.at(c + 1)(k) -
                     area_face_(c) * flux.at(c)(k)) /
                   (area_cell_(c) * dx_);
      if (k == 1) {
        const Primitive qc = primitive(w(3 * c), w(3 * c + 1), w(3 * c + 2), c);
        val += qc.p / area_cell_(c) * darea_cell_(c);
      }
      out(static_cast<Index>(q)) = val;
    }
  }

 private:
  // Subsonic inflow: stagnation temperature and pressure are held; the
  // velocity is taken from the first interior cell.
  Vector inflow_ghost(const Vector& w) const {
    const Primitive q0 = primitive(w(0), w(1), w(2), 0);
    const double g = kGamma;
    const double T = kTotalTemperature -
                     q0.u * q0.u * (g - 1.0) / (2.0 * g * kGasConstant);
    if (!(T > 0.0)) fail("inflow ghost: nonpositive temperature");
    Primitive qg;
    qg.u = q0.u;
    qg.p = kTotalPressure * std::pow(T / kTotalTemperature, g / (g - 1.0));
    qg.rho = qg.p / (kGasConstant * T);
    return conservative(qg);
  }

  // Subsonic outflow: static pressure is pinned to the post-shock value;
  // density and velocity are extrapolated from the last interior cell.
  Vector outflow_ghost(const Vector& w, const Vector& mu) const {
    const Index i = n_ - 1;
    const Primitive qn = primitive(w(3 * i), w(3 * i + 1), w(3 * i + 2), i);
    Primitive qg;
    qg.rho = qn.rho;
    qg.u = qn.u;
    qg.p = cached_exit_pressure(mu);
    return conservative(qg);
  }

  static double cached_exit_pressure(const Vector& mu) {
    thread_local Vector last_mu;
    thread_local double last_p = 0.0;
    if (last_mu.size() != 2 || last_mu(0) != mu(0) || last_mu(1) != mu(1)) {
      last_mu = mu;
      last_p = boundary_exit_pressure(mu);
    }
    return last_p;
  }

  Index n_;
  double dx_;
  Vector area_face_;
  Vector area_cell_;
  Vector darea_cell_;
};

}  // namespace euler_detail

double nozzle_area(double x) {
  require(x >= 0.0 && x <= 1.0, "nozzle coordinate outside [0, 1]");
  if (x < 0.25) {
    return ((-0.288 * x + 0.4080) * x - 0.1920) * x + 0.2;
  } else if (x < 0.5) {
    const double s = x - 0.25;
    return ((-0.288 * s + 0.1920) * s - 0.0420) * s + 0.1730;
  } else if (x < 0.75) {
    const double s = x - 0.5;
    return ((0.288 * s - 0.0240) * s + 0.0) * s + 0.17;
  }
  const double s = x - 0.75;
  return ((0.288 * s + 0.1920) * s + 0.0420) * s + 0.1730;
}

double nozzle_darea_dx(double x) {
  require(x >= 0.0 && x <= 1.0, "nozzle coordinate outside [0, 1]");
  if (x < 0.25) {
    return (-3.0 * 0.288 * x + 2.0 * 0.4080) * x - 0.1920;
  } else if (x < 0.5) {
    const double s = x - 0.25;
    return (-3.0 * 0.288 * s + 2.0 * 0.1920) * s - 0.0420;
  } else if (x < 0.75) {
    const double s = x - 0.5;
    return (3.0 * 0.288 * s - 2.0 * 0.0240) * s;
  }
  const double s = x - 0.75;
  return (3.0 * 0.288 * s + 2.0 * 0.1920) * s + 0.0420;
}

double area_mach_number(double area, double mach_mid, bool supersonic,
                        double gamma) {
  require(area > 0.0, "area must be positive");
  require(mach_mid > 0.0, "midpoint Mach number must be positive");
  const double expo = -(gamma + 1.0) / (2.0 * (gamma - 1.0));
  auto g = [gamma, expo](double M) {
    return M * std::pow(1.0 + 0.5 * (gamma - 1.0) * M * M, expo);
  };
  const double area_mid = nozzle_area(euler_detail::kThroatLocation);
  const double target = g(mach_mid) * area_mid / area;

  double lo = supersonic ? 1.0 : 1e-6;
  double hi = supersonic ? 10.0 : 1.0;
  double glo = g(lo) - target;
  double ghi = g(hi) - target;
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if (glo * ghi > 0.0) {
    std::ostringstream msg;
    msg << "Mach-area equation has no " << (supersonic ? "supersonic" : "subsonic")
        << " root for area " << area;
    fail(msg.str());
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid) - target;
    if (gm == 0.0) return mid;
    if (glo * gm < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      glo = gm;
    }
  }
  return 0.5 * (lo + hi);
}

double shock_downstream_velocity(double m, double n, double h, double u1,
                                 double gamma) {
  require(m > 0.0, "mass flux must be positive");
  // Momentum and energy jump conditions reduce to a quadratic in u2:
  //   (1/2 - gamma/(gamma-1)) u2^2 + gamma/(gamma-1) (n/m) u2 - h = 0
  const double a = 0.5 - gamma / (gamma - 1.0);
  const double b = gamma / (gamma - 1.0) * n / m;
  const double c = -h;
  const double disc = b * b - 4.0 * a * c;
  require(disc >= 0.0, "shock jump conditions have no real solution");
  const double sq = std::sqrt(disc);
  const double r1 = (-b + sq) / (2.0 * a);
  const double r2 = (-b - sq) / (2.0 * a);
  // One root reproduces the upstream state; the other is the shock.
  const double u2 = (std::abs(r1 - u1) > std::abs(r2 - u1)) ? r1 : r2;
  require(u2 > 0.0, "downstream velocity must be positive");
  return u2;
}

Vector euler_initial_condition(const Vector& mu, Index n_cells) {
  using namespace euler_detail;
  require(mu.size() == 2, "nozzle expects two parameters");
  const double dx = 1.0 / double(n_cells);

  // Post-shock state from the jump conditions at the shock location.
  const double A_shock = nozzle_area(kShockLocation);
  const double M1 = area_mach_number(A_shock, mu(1), true, kGamma);
  const Primitive q1 = isentropic_state(M1);
  const double e1 = q1.p / (kGamma - 1.0) + 0.5 * q1.rho * q1.u * q1.u;
  const double m = q1.rho * q1.u;
  const double n = q1.p + q1.rho * q1.u * q1.u;
  const double h = (e1 + q1.p) / q1.rho;
  const double u2 = shock_downstream_velocity(m, n, h, q1.u, kGamma);
  Primitive q2;
  q2.u = u2;
  q2.rho = m / u2;
  q2.p = n - m * u2;

  Vector w(3 * n_cells);
  for (Index i = 0; i < n_cells; ++i) {
    const double x = (double(i) + 0.5) * dx;
    Primitive q;
    if (x < kShockLocation) {
      const bool supersonic = x > kThroatLocation;
      double M;
      if (std::abs(x - kThroatLocation) < 1e-14) {
        M = mu(1);
      } else {
        M = area_mach_number(nozzle_area(x), mu(1), supersonic, kGamma);
      }
      q = isentropic_state(M);
    } else {
      q = q2;
    }
    w.segment(3 * i, 3) = conservative(q);
  }

  // Raise the static pressure in the exit cell by the ratio mu_1.
  const Index last = n_cells - 1;
  const Primitive qe = primitive(w(3 * last), w(3 * last + 1), w(3 * last + 2),
                                 last);
  const double p_new = qe.p * mu(0);
  w(3 * last + 2) = p_new / (kGamma - 1.0) + 0.5 * qe.rho * qe.u * qe.u;
  return w;
}

std::unique_ptr<SemiDiscreteModel> make_euler_nozzle(Index n_cells) {
  return std::make_unique<euler_detail::EulerNozzleModel>(n_cells);
}

Vector euler_conservative(double rho, double u, double p) {
  euler_detail::Primitive q;
  q.rho = rho;
  q.u = u;
  q.p = p;
  return euler_detail::conservative(q);
}

Vector euler_primitives(const Vector& state) {
  require(state.size() == 3, "conservative state must have three entries");
  const euler_detail::Primitive q =
      euler_detail::primitive(state(0), state(1), state(2), 0);
  Vector out(3);
  out << q.rho, q.u, q.p;
  return out;
}

Vector euler_flux(const Vector& state) {
  require(state.size() == 3, "conservative state must have three entries");
  const euler_detail::Primitive q =
      euler_detail::primitive(state(0), state(1), state(2), 0);
  return euler_detail::physical_flux(q, state(2));
}

Vector euler_roe_flux(const Vector& left, const Vector& right) {
  require(left.size() == 3 && right.size() == 3,
          "conservative states must have three entries");
  return euler_detail::roe_flux(left, right, 1);
}

double roe_average_velocity(double rho_l, double u_l, double rho_r,
                            double u_r) {
  const double sl = std::sqrt(rho_l);
  const double sr = std::sqrt(rho_r);
  return (sl * u_l + sr * u_r) / (sl + sr);
}

Vector euler_isentropic_primitives(double mach) {
  const euler_detail::Primitive q = euler_detail::isentropic_state(mach);
  Vector out(3);
  out << q.rho, q.u, q.p;
  return out;
}

}  // namespace stlspg
