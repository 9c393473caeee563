// SPDX-License-Identifier: Apache-2.0
//
// Computable stability and error constants of the discrete-residual
// framework: extreme singular values of the multistep operators, Lipschitz
// and inverse-Lipschitz constants, the Lebesgue constant with its growth
// sweep, and the a-posteriori residual bound.
#pragma once

#include "stlspg/core.hpp"
#include "stlspg/models.hpp"
#include "stlspg/time_integration.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stlspg {

struct OperatorBounds {
  double sigma_min_A = 0.0;
  double sigma_max_A = 0.0;
  double sigma_max_B = 0.0;
  Index num_steps = 0;
};

// Extreme singular values of the scalar-block multistep operators over
// num_steps steps. Dense SVD for moderate sizes; banded power/inverse
// iteration on the triangular structure for large ones.
OperatorBounds lmm_operator_bounds(const LinearMultistepScheme& scheme,
                                   Index num_steps);

// Largest time step for which the inverse-Lipschitz constant stays positive:
// sigma_min(A) / (lf * sigma_max(B)); +inf when lf == 0.
double assumption_max_dt(const OperatorBounds& b, double lf);
bool timestep_assumption_holds(const OperatorBounds& b, double dt, double lf);

// L_r = sigma_max(A) + dt*lf*sigma_max(B); the weighted overload takes the
// extreme singular values of the pre-weighted operators.
double residual_lipschitz(const OperatorBounds& b, double dt, double lf);
double residual_lipschitz_weighted(double sigma_max_WA, double sigma_max_WB,
                                   double dt, double lf);

// K_r = sigma_min(A) - dt*lf*sigma_max(B); errors when not positive.
double residual_inverse_lipschitz(const OperatorBounds& b, double dt,
                                  double lf);

struct StabilityConstants {
  double lebesgue = 0.0;           // Lambda
  double one_plus_lebesgue = 0.0;  // 1 + Lambda
  double sqrt_steps_bound = 0.0;   // sqrt(num_steps) * (1 + Lambda)
};

// Lambda = (sigma_max(A) - sigma_min(A) + 2*dt*lf*sigma_max(B)) /
//          (sigma_min(A) - dt*lf*sigma_max(B)); errors when the time-step
// assumption fails.
StabilityConstants lebesgue_constant(const OperatorBounds& b, double dt,
                                     double lf);

// residual_norm / (p * k_r).
double aposteriori_bound(double weighted_residual_norm, double p, double k_r);

// Sampled estimate of the velocity Lipschitz constant: the largest
// difference quotient over seeded random state pairs inside [lo, hi]^dim.
double lipschitz_estimate(const SemiDiscreteModel& model, const Vector& lo,
                          const Vector& hi, const Vector& mu, double t,
                          Index num_pairs, std::uint64_t seed);

struct LebesgueSweepPoint {
  double horizon = 0.0;  // T = num_steps * dt
  Index num_steps = 0;
  double one_plus_lambda = 0.0;
  double sqrt_steps_bound = 0.0;
  bool valid = false;  // time-step assumption held
};

// Evaluates the stability constants across final times; invalid points are
// reported with valid = false instead of erroring.
std::vector<LebesgueSweepPoint> lebesgue_growth_sweep(
    const LinearMultistepScheme& scheme, double dt, double lf,
    const std::vector<double>& horizons);

// Least-squares slope of log(y) against log(x).
double fitted_loglog_slope(const std::vector<double>& x,
                           const std::vector<double>& y);

// CSV columns: horizon, one_plus_lambda, sqrt_steps_bound (valid rows only).
void write_growth_csv(const std::string& path,
                      const std::vector<LebesgueSweepPoint>& sweep);

}  // namespace stlspg
