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
// Stochastic wave-function evolution of the spin chain through the adiabatic
// field ramp. States are stored in the sigma_x product basis (bit 0 = |up>,
// the +x eigenstate), which makes the Ising term diagonal and readout a
// direct amplitude-square sum. Jumps:
//   dephasing         c = sqrt(gamma_deph) sigma_x^i
//   emission branch b c = sqrt(gamma_se p_b) |b>_i (<up_z|_i + <dn_z|_i)
// with b one of {reset to |dn_z>, reset to |up_z>, leak out of the qubit
// space}. A leaked ion is dropped from the evolving register and counted as
// spin up at every later readout.

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ionsim/rng.hpp"

namespace ionsim {

struct RampSchedule {
  double b0_khz = 0.0;       // initial transverse field
  double tau_us = 80.0;      // exponential time constant
  double t_final_us = 0.0;   // total simulated time
  double b_final_khz = 0.0;  // field is held here once the ramp reaches it
  std::vector<double> sample_times_us;

  // B(t) = max(B0 exp(-t/tau), B_final).
  double field_at_us(double t_us) const;

  void validate() const;
  // Non-fatal advisories, e.g. B0/|J| < 5 (protocol should start deep in
  // the paramagnet).
  std::vector<std::string> warnings_for(double mean_j_khz) const;
};

struct NoiseModel {
  double gamma_se_per_ms = 0.0;    // spontaneous emission rate per ion
  double gamma_deph_per_ms = 0.0;  // sigma_x dephasing jump rate per ion
  double p_down = 1.0 / 3.0;       // emission branch: reset to |dn_z>
  double p_up = 1.0 / 3.0;         // emission branch: reset to |up_z>
  double p_leak = 1.0 / 3.0;       // emission branch: leave the qubit space

  void validate() const;
};

struct SpinState {
  int n_total = 0;
  std::vector<int> active;  // ascending original ion indices
  std::vector<int> leaked;
  // 2^|active| amplitudes; bit j of the index addresses active[j],
  // bit value 0 = |up> (sigma_x = +1), 1 = |dn>.
  std::vector<std::complex<double>> amp;
  double norm2 = 1.0;  // running squared norm between jumps

  int n_active() const { return static_cast<int>(active.size()); }
  std::size_t dim() const { return amp.size(); }
};

// Product state with every spin in the +y eigenstate (amplitudes
// (1, i)/sqrt(2) per spin in the x basis). With probability flip_error a
// spin is prepared in -y instead; rng must be provided when 0 < p < 1.
SpinState initial_state(int n, double flip_error, RngStream* rng = nullptr);

// d|psi>/dt = -i 2 pi H |psi| with H in kHz and t in ms,
// H = -(1/N) sum_{i<j} J_ij sx_i sx_j - B sum_i sy_i restricted to the
// active ions (J passed for the full register).
std::vector<std::complex<double>> hamiltonian_apply(
    const SpinState& state, const Eigen::MatrixXd& j_khz_full, double b_khz);

enum class JumpChannel { kDephasing, kEmissionDown, kEmissionUp, kEmissionLeak };

const char* jump_channel_name(JumpChannel c);

struct JumpEvent {
  double time_us = 0.0;
  int ion = 0;  // original index
  JumpChannel channel = JumpChannel::kDephasing;
};

struct TrajectoryRecord {
  std::uint64_t stream_key = 0;
  std::vector<JumpEvent> jumps;
  // One P(s) row (s = 0..N, leaked ions counted up) per sample time.
  std::vector<std::vector<double>> sample_ps;
  // State at t_final; amp carries the running (pre-renormalization) norm.
  SpinState final_state;
};

struct TrajectorySettings {
  // Step cap: h * 2pi * max(B0, N max|J|) <= phase_cap_rad.
  double phase_cap_rad = 0.05;
  // Jump time located by bisection to this fraction of a step.
  double jump_time_frac = 1e-3;
};

TrajectoryRecord evolve_trajectory(SpinState state,
                                   const Eigen::MatrixXd& j_khz,
                                   const RampSchedule& ramp,
                                   const NoiseModel& noise, RngStream rng,
                                   const TrajectorySettings& settings = {});

struct EnsembleConfig {
  Eigen::MatrixXd j_khz;
  RampSchedule ramp;
  NoiseModel noise;
  double flip_error = 0.0;
  int n_workers = 0;  // <= 0: hardware concurrency
  int jackknife_blocks = 100;
  TrajectorySettings settings;
};

struct EnsembleStats {
  int n_ions = 0;
  int n_traj = 0;
  std::uint64_t base_seed = 0;
  std::vector<double> sample_times_us;
  std::vector<std::vector<double>> p_mean;  // [time][s]
  std::vector<std::vector<double>> p_sem;   // [time][s]
  // Per-block means in trajectory index order, for jackknife errors on
  // derived quantities.
  std::vector<std::vector<std::vector<double>>> block_p_mean;
  std::vector<int> block_sizes;
  double mean_jumps_per_traj = 0.0;
};

// Runs n_traj independent trajectories with per-trajectory streams derived
// from (base_seed, index). The result is bit-identical for any worker count
// or execution order.
EnsembleStats run_ensemble(const EnsembleConfig& cfg, int n_traj,
                           std::uint64_t base_seed);

}  // namespace ionsim
