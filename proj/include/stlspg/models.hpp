// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "stlspg/core.hpp"

namespace stlspg {

/// Parameterized semi-discrete model dw/dt = f(w, t; mu).
///
/// Besides full velocity/Jacobian evaluation, models expose component-wise
/// evaluation over a caller-chosen index set plus the sparsity stencil of
/// each component, so hyper-reduced residuals never touch more than
/// O(|samples| * stencil) entries. Component evaluations are counted (the
/// complexity contract of the sampled objective is asserted on this counter).
class SemiDiscreteModel {
public:
  virtual ~SemiDiscreteModel() = default;

  virtual Index dim() const = 0;
  virtual std::string label() const = 0;
  virtual Index parameter_dim() const = 0;
  /// Box bounds, one row per parameter: column 0 = lower, column 1 = upper.
  virtual Matrix parameter_domain() const = 0;
  virtual Vector initial_state(const Vector& mu) const = 0;

  virtual Vector velocity(const Vector& w, double t, const Vector& mu) const = 0;

  /// Dense df/dw. Default: one-sided finite differences, h = 1e-7 scaled.
  virtual Matrix velocity_jacobian(const Vector& w, double t,
                                   const Vector& mu) const;

  /// State indices component `comp` of the velocity depends on.
  /// Default: all of them (dense model).
  virtual std::vector<Index> velocity_stencil(Index comp) const;

  /// Evaluate only the requested velocity components into out (same length
  /// as comps). Only stencil entries of w are read. Increments the component
  /// counter by comps.size().
  virtual void velocity_components(const Vector& w, double t, const Vector& mu,
                                   const std::vector<Index>& comps,
                                   Vector& out) const;

  /// Rows of df/dw for the requested components, as a dense
  /// comps.size() x dim() matrix (zero outside each row's stencil).
  /// Default: one-sided finite differences over the stencil closure.
  virtual void velocity_jacobian_rows(const Vector& w, double t,
                                      const Vector& mu,
                                      const std::vector<Index>& comps,
                                      Matrix& out) const;

  /// Warn (never fail) when mu leaves the training box.
  void check_parameters(const Vector& mu) const;

  std::uint64_t component_evaluations() const { return counter_.load(); }
  void reset_component_evaluations() const { counter_.store(0); }

protected:
  void count_components(std::uint64_t n) const { counter_.fetch_add(n); }

private:
  mutable std::atomic<std::uint64_t> counter_{0};
};

/// Inviscid Burgers on [0,1], finite volumes, Godunov intercell flux for
/// f(w) = w^2/2, inflow value mu_1 on the left, zero-gradient outflow on the
/// right, source amplitude * exp(mu_2 x_i), initial state all ones.
/// The source amplitude is 0.02 in the benchmark; it is exposed so the
/// zero-source steady state is testable.
std::unique_ptr<SemiDiscreteModel> make_burgers(Index n_cells = 100,
                                                double source_amplitude = 0.02);

/// Quasi-1D Euler converging-diverging nozzle, 50 cells by default,
/// conservative unknowns (rho, rho*u, e) per cell (cell-major), Roe flux
/// with Harten entropy fix, area source on the momentum equation, total
/// inflow conditions and fixed post-shock exit pressure through ghost
/// states; the initial condition raises the exit cell's pressure by mu_1 to
/// launch the transient. mu = (exit pressure factor, Mach number at
/// mid-nozzle).
std::unique_ptr<SemiDiscreteModel> make_euler_nozzle(Index n_cells = 50);

/// Godunov intercell flux for the convex flux f(w) = w^2/2: the exact
/// Riemann flux, min of f over [w_left, w_right] when w_left <= w_right,
/// max over [w_right, w_left] otherwise.
double burgers_godunov_flux(double w_left, double w_right);

// --- nozzle helpers (exposed for direct testing) --------------------------

/// Four-piece cubic nozzle area on [0,1]; throws outside the domain.
double nozzle_area(double x);
double nozzle_darea_dx(double x);

/// Subsonic (branch=false) or supersonic (branch=true) root M of
///   M = (M_m A_m / A) * ((1 + (g-1)/2 M^2) / (1 + (g-1)/2 M_m^2))^((g+1)/(2(g-1)))
/// by bisection to 1e-12. Throws when the bracket fails.
double area_mach_number(double area, double mach_mid, bool supersonic,
                        double gamma);

/// Downstream velocity u2 of a stationary shock with upstream fluxes
/// m = rho1 u1, n = rho1 u1^2 + p1, h = (e1 + p1)/rho1: the root of
///   (1/2 - g/(g-1)) u2^2 + g/(g-1) (n/m) u2 - h = 0
/// that differs from u1 (the discontinuous branch).
double shock_downstream_velocity(double m, double n, double h, double u1,
                                 double gamma);

/// The constructed initial field (shock at x = 0.85, exit pressure raised by
/// mu_1) in conservative variables; identical to
/// make_euler_nozzle(n_cells)->initial_state(mu).
Vector euler_initial_condition(const Vector& mu, Index n_cells = 50);

// --- perfect-gas building blocks (gamma = 1.3, exposed for direct testing) --

/// Conservative 3-state (rho, rho u, e) from primitives (rho, u, p).
Vector euler_conservative(double rho, double u, double p);

/// Primitives (rho, u, p) from a conservative 3-state via the pressure
/// closure p = (gamma - 1) rho (e/rho - u^2/2); throws on nonphysical input.
Vector euler_primitives(const Vector& state);

/// Physical flux F(U) = (rho u, rho u^2 + p, (e + p) u).
Vector euler_flux(const Vector& state);

/// Roe numerical flux (Harten entropy fix on the acoustic waves) between two
/// conservative 3-states.
Vector euler_roe_flux(const Vector& left, const Vector& right);

/// Density-weighted Roe average of the velocity.
double roe_average_velocity(double rho_l, double u_l, double rho_r,
                            double u_r);

/// Isentropic primitives (rho, u, p) at Mach number M from the benchmark
/// stagnation conditions T_t = 300 K, p_t = 1e6 Pa, R = 355.4 J/(kg K).
Vector euler_isentropic_primitives(double mach);

}  // namespace stlspg
