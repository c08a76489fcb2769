// Copyright 2026 The ionsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Order parameters of the spin-count distribution P(s), the exact
// uniform-coupling reference ground state in the total-spin basis, and a
// small-system master-equation reference for the trajectory engine.

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ionsim/dynamics.hpp"

namespace ionsim {

struct SpinDistribution {
  int n = 0;
  std::vector<double> p;    // P(s), s = 0..n
  std::vector<double> sem;  // optional per-bin standard errors

  // p >= 0 and sums to 1 within 1e-9.
  void validate() const;
};

struct OrderParams {
  double m_x = 0.0;
  double m_x_scaled = 0.0;
  double g = 0.0;
  double g_scaled = 0.0;
  double p_fm = 0.0;
};

// m_x = (1/N) sum_s |N-2s| P(s)
double magnetization(const SpinDistribution& d);

// g = sum_s (N-2s)^4 P(s) / (sum_s (N-2s)^2 P(s))^2; throws NumericalError
// when the second moment vanishes.
double binder_cumulant(const SpinDistribution& d);

// Paramagnetic (binomial) reference values.
double binomial_magnetization(int n);               // m0_x,N
inline double binomial_binder(int n) { return 3.0 - 2.0 / n; }  // g0_N

// Scaled order parameters: mbar = (m0-m)/(m0-1), gbar = (g0-g)/(g0-1).
// Requires n >= 2 (both scalings are singular at n = 1).
OrderParams scale_order_params(const SpinDistribution& d);

SpinDistribution binomial_distribution(int n);
SpinDistribution ghz_mixture(int n);

// Exact ground state of the uniform-coupling model in the (N+1)-dimensional
// maximal total-spin sector: H = -(J/N)(2 Sx^2 - N/2) - 2 B Sy, expressed in
// the Sx eigenbasis where Sy is the standard tridiagonal ladder form.
struct DickeResult {
  SpinDistribution dist;
  // Gap to the lowest excited state actually coupled to the ground state
  // through Sy (the parity-forbidden partner is skipped).
  double energy_gap_khz = 0.0;
};
DickeResult dicke_ground_state(int n, double j_khz, double b_khz);

// Max |d gbar / d ln(B/J)| by central differences. Rejects grids with fewer
// than min_points_per_decade.
double max_slope_vs_log(const std::vector<double>& b_over_j,
                        const std::vector<double>& gbar,
                        double min_points_per_decade = 10.0);

// Master equation whose unraveling is exactly the trajectory engine's jump
// scheme. Each spin is a 3-level system (up, down, leaked); n <= 3.
struct LindbladResult {
  std::vector<double> sample_times_us;
  std::vector<std::vector<double>> p;   // [time][s]
  std::vector<std::vector<double>> sy;  // [time][ion]: <sigma_y^i>
  std::vector<OrderParams> params;
};
LindbladResult lindblad_oracle(int n, const Eigen::MatrixXd& j_khz,
                               const RampSchedule& ramp,
                               const NoiseModel& noise,
                               double flip_error = 0.0);

// Order parameters of the ensemble-averaged P(s) at every sample time, with
// jackknife standard errors over the stored trajectory blocks.
struct OrderParamsSeries {
  std::vector<OrderParams> value;
  std::vector<OrderParams> sem;
};
OrderParamsSeries ensemble_order_params(const EnsembleStats& stats);

}  // namespace ionsim
