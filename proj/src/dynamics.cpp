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

#include "ionsim/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "ionsim/errors.hpp"

namespace ionsim {

double RampSchedule::field_at_us(double t_us) const {
  return std::max(b0_khz * std::exp(-t_us / tau_us), b_final_khz);
}

void RampSchedule::validate() const {
  if (!(tau_us > 0.0)) throw ConfigError("ramp tau must be positive");
  if (b_final_khz < 0.0 || b0_khz < b_final_khz)
    throw ConfigError("ramp requires B0 >= B_final >= 0");
  if (t_final_us < 0.0) throw ConfigError("t_final must be >= 0");
  double prev = -1.0;
  for (double t : sample_times_us) {
    if (t < 0.0 || t > t_final_us + 1e-9)
      throw ConfigError("sample times must lie in [0, t_final]");
    if (t <= prev) throw ConfigError("sample times must be strictly increasing");
    prev = t;
  }
}

std::vector<std::string> RampSchedule::warnings_for(double mean_j_khz) const {
  std::vector<std::string> out;
  if (mean_j_khz > 0.0) {
    const double ratio = b0_khz / mean_j_khz;
    if (ratio < 1.0)
      throw ConfigError("B0/|J| < 1: protocol must start in the paramagnet");
    if (ratio < 5.0)
      out.push_back("B0/|J| = " + std::to_string(ratio) +
                    " < 5: initial state only marginally paramagnetic");
  }
  return out;
}

void NoiseModel::validate() const {
  if (gamma_se_per_ms < 0.0 || gamma_deph_per_ms < 0.0)
    throw ConfigError("noise rates must be >= 0");
  if (p_down < 0.0 || p_up < 0.0 || p_leak < 0.0)
    throw ConfigError("branch probabilities must be >= 0");
  if (std::abs(p_down + p_up + p_leak - 1.0) > 1e-12)
    throw ConfigError("branch probabilities must sum to 1");
}

const char* jump_channel_name(JumpChannel c) {
  switch (c) {
    case JumpChannel::kDephasing: return "dephasing";
    case JumpChannel::kEmissionDown: return "emission_down";
    case JumpChannel::kEmissionUp: return "emission_up";
    case JumpChannel::kEmissionLeak: return "emission_leak";
  }
  return "unknown";
}

SpinState initial_state(int n, double flip_error, RngStream* rng) {
  if (n < 1 || n > 24) throw ConfigError("n must be in [1, 24]");
  if (flip_error < 0.0 || flip_error > 1.0)
    throw ConfigError("flip_error must be a probability");

  std::vector<bool> flipped(n, false);
  if (flip_error >= 1.0) {
    flipped.assign(n, true);
  } else if (flip_error > 0.0) {
    if (rng == nullptr)
      throw ConfigError("flip_error in (0,1) requires an RNG stream");
    for (int i = 0; i < n; ++i) flipped[i] = rng->uniform() < flip_error;
  }

  SpinState state;
  state.n_total = n;
  state.active.resize(n);
  for (int i = 0; i < n; ++i) state.active[i] = i;
  const std::size_t dim = std::size_t{1} << n;
  state.amp.resize(dim);
  const double scale = std::pow(0.5, 0.5 * n);
  for (std::size_t k = 0; k < dim; ++k) {
    // |+y> = (|up> + i |dn>)/sqrt(2); a flipped spin carries -i instead.
    std::complex<double> v(scale, 0.0);
    for (int i = 0; i < n; ++i) {
      if ((k >> i) & 1u)
        v *= std::complex<double>(0.0, flipped[i] ? -1.0 : 1.0);
    }
    state.amp[k] = v;
  }
  state.norm2 = 1.0;
  return state;
}

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// Ising diagonal E_k = -(1/N) sum_{a<b} J(ia,ib) x_a x_b over the active
// subset, x = +1 for bit 0 (|up>).
std::vector<double> ising_diagonal(const Eigen::MatrixXd& j_khz,
                                   const std::vector<int>& active,
                                   int n_total) {
  const int a = static_cast<int>(active.size());
  const std::size_t dim = std::size_t{1} << a;
  std::vector<double> diag(dim, 0.0);
  for (int p = 0; p < a; ++p) {
    for (int q = p + 1; q < a; ++q) {
      const double c = -j_khz(active[p], active[q]) / n_total;
      for (std::size_t k = 0; k < dim; ++k) {
        const double xp = ((k >> p) & 1u) ? -1.0 : 1.0;
        const double xq = ((k >> q) & 1u) ? -1.0 : 1.0;
        diag[k] += c * xp * xq;
      }
    }
  }
  return diag;
}

class TrajectoryEngine {
 public:
  TrajectoryEngine(const Eigen::MatrixXd& j_khz, const RampSchedule& ramp,
                   const NoiseModel& noise, const TrajectorySettings& st)
      : j_khz_(j_khz), ramp_(ramp), noise_(noise), st_(st) {
    const int n = static_cast<int>(j_khz.rows());
    if (j_khz.cols() != n) throw ConfigError("coupling matrix must be square");
    ramp_.validate();
    noise_.validate();
    const double max_j = n > 0 ? j_khz.cwiseAbs().maxCoeff() : 0.0;
    noise_free_ = noise_.gamma_se_per_ms == 0.0 && noise_.gamma_deph_per_ms == 0.0;
    // Resolve both the fastest phase and the fastest decay. Noiseless runs
    // use a quarter of the cap: the squared norm must hold 1e-9 over the
    // full ramp, and the weakly occupied far-detuned components damp as the
    // sixth power of their per-step phase.
    const double cap = noise_free_ ? 0.25 * st_.phase_cap_rad : st_.phase_cap_rad;
    const double rate_scale =
        kTwoPi * std::max(ramp_.b0_khz, n * max_j) +
        n * (noise_.gamma_deph_per_ms + 2.0 * noise_.gamma_se_per_ms);
    h_ms_ = rate_scale > 0.0 ? cap / rate_scale
                             : std::max(ramp_.t_final_us * 1e-3, 1e-3);
  }

  TrajectoryRecord run(SpinState state, RngStream rng) {
    load_state(std::move(state));
    rng_ = rng;
    record_ = TrajectoryRecord{};
    record_.stream_key = rng_.key();

    threshold_ = noise_free_ ? -1.0 : rng_.uniform_pos();
    refresh_energy_shift(ramp_.field_at_us(0.0));

    std::vector<double> boundaries;
    boundaries.push_back(0.0);
    for (double t : ramp_.sample_times_us) boundaries.push_back(t * 1e-3);
    boundaries.push_back(ramp_.t_final_us * 1e-3);
    std::sort(boundaries.begin(), boundaries.end());

    std::size_t next_sample = 0;
    double t = 0.0;
    for (std::size_t b = 0; b < boundaries.size(); ++b) {
      const double end = boundaries[b];
      integrate_to(t, end);
      t = end;
      if (next_sample < ramp_.sample_times_us.size() &&
          std::abs(t * 1e3 - ramp_.sample_times_us[next_sample]) < 1e-9) {
        record_sample();
        ++next_sample;
      }
    }

    record_.final_state.n_total = n_total_;
    record_.final_state.active = active_;
    record_.final_state.leaked = leaked_;
    record_.final_state.amp.resize(dim_);
    for (std::size_t k = 0; k < dim_; ++k)
      record_.final_state.amp[k] = std::complex<double>(re_[k], im_[k]);
    record_.final_state.norm2 = norm2_;
    return std::move(record_);
  }

  double current_norm2() const { return norm2_; }

 private:
  void load_state(SpinState s) {
    n_total_ = s.n_total;
    active_ = s.active;
    leaked_ = s.leaked;
    const std::size_t dim = s.amp.size();
    if (dim != (std::size_t{1} << active_.size()))
      throw ConfigError("state dimension does not match active set");
    if (j_khz_.rows() != n_total_)
      throw ConfigError("coupling matrix size does not match state");
    re_.resize(dim);
    im_.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      re_[k] = s.amp[k].real();
      im_[k] = s.amp[k].imag();
    }
    norm2_ = 0.0;
    for (std::size_t k = 0; k < dim; ++k)
      norm2_ += re_[k] * re_[k] + im_[k] * im_[k];
    if (!(norm2_ > 0.0)) throw ConfigError("state has zero norm");
    if (std::abs(norm2_ - 1.0) > 1e-12) {
      const double inv = 1.0 / std::sqrt(norm2_);
      for (std::size_t k = 0; k < dim; ++k) {
        re_[k] *= inv;
        im_[k] *= inv;
      }
      norm2_ = 1.0;
    }
    rebuild_tables();
  }

  void rebuild_tables() {
    a_ = static_cast<int>(active_.size());
    dim_ = std::size_t{1} << a_;
    ising_diag_ = ising_diagonal(j_khz_, active_, n_total_);
    decay_half_.assign(dim_, 0.0);
    if (!noise_free_) {
      for (std::size_t k = 0; k < dim_; ++k) {
        const int ups = a_ - std::popcount(static_cast<unsigned long long>(k));
        decay_half_[k] = 0.5 * (noise_.gamma_deph_per_ms * a_ +
                                2.0 * noise_.gamma_se_per_ms * ups);
      }
    }
    for (auto* v : {&k1r_, &k1i_, &k2r_, &k2i_, &k3r_, &k3i_, &k4r_, &k4i_,
                    &yr_, &yi_, &prer_, &prei_})
      v->resize(dim_);
  }

  double field_at_ms(double t_ms) const { return ramp_.field_at_us(t_ms * 1e3); }

  // out = (-i 2pi (H - e_shift) - decay/2) psi
  void deriv(const double* pr, const double* pi, double* outr, double* outi,
             double b_khz) const {
    const std::size_t dim = dim_;
    const double shift = kTwoPi * e_shift_;
    for (std::size_t k = 0; k < dim; ++k) {
      const double di = -kTwoPi * ising_diag_[k] + shift;
      const double dr = -decay_half_[k];
      outr[k] = dr * pr[k] - di * pi[k];
      outi[k] = dr * pi[k] + di * pr[k];
    }
    const double f = kTwoPi * b_khz;
    if (f == 0.0) return;
    for (int j = 0; j < a_; ++j) {
      const std::size_t m = std::size_t{1} << j;
      for (std::size_t base = 0; base < dim; base += 2 * m) {
        for (std::size_t off = 0; off < m; ++off) {
          const std::size_t k0 = base + off;
          const std::size_t k1 = k0 + m;
          outr[k0] += f * pr[k1];
          outi[k0] += f * pi[k1];
          outr[k1] -= f * pr[k0];
          outi[k1] -= f * pi[k0];
        }
      }
    }
  }

  // Classic RK4 with B(t) evaluated at the stage times. Advances re_/im_.
  void rk4_step(double t_ms, double h) {
    const double b0 = field_at_ms(t_ms);
    const double bh = field_at_ms(t_ms + 0.5 * h);
    const double b1 = field_at_ms(t_ms + h);
    const std::size_t dim = dim_;
    deriv(re_.data(), im_.data(), k1r_.data(), k1i_.data(), b0);
    for (std::size_t k = 0; k < dim; ++k) {
      yr_[k] = re_[k] + 0.5 * h * k1r_[k];
      yi_[k] = im_[k] + 0.5 * h * k1i_[k];
    }
    deriv(yr_.data(), yi_.data(), k2r_.data(), k2i_.data(), bh);
    for (std::size_t k = 0; k < dim; ++k) {
      yr_[k] = re_[k] + 0.5 * h * k2r_[k];
      yi_[k] = im_[k] + 0.5 * h * k2i_[k];
    }
    deriv(yr_.data(), yi_.data(), k3r_.data(), k3i_.data(), bh);
    for (std::size_t k = 0; k < dim; ++k) {
      yr_[k] = re_[k] + h * k3r_[k];
      yi_[k] = im_[k] + h * k3i_[k];
    }
    deriv(yr_.data(), yi_.data(), k4r_.data(), k4i_.data(), b1);
    const double w = h / 6.0;
    double n2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      re_[k] += w * (k1r_[k] + 2.0 * (k2r_[k] + k3r_[k]) + k4r_[k]);
      im_[k] += w * (k1i_[k] + 2.0 * (k2i_[k] + k3i_[k]) + k4i_[k]);
      n2 += re_[k] * re_[k] + im_[k] * im_[k];
    }
    norm2_ = n2;
  }

  // <H(t)> / <psi|psi>, used to remove the (physically irrelevant) global
  // phase rate from the generator so long integrations stay norm-accurate.
  double mean_energy(double b_khz) const {
    double e = 0.0;
    for (std::size_t k = 0; k < dim_; ++k)
      e += ising_diag_[k] * (re_[k] * re_[k] + im_[k] * im_[k]);
    double sy = 0.0;
    for (int j = 0; j < a_; ++j) {
      const std::size_t m = std::size_t{1} << j;
      for (std::size_t base = 0; base < dim_; base += 2 * m) {
        for (std::size_t off = 0; off < m; ++off) {
          const std::size_t k0 = base + off;
          const std::size_t k1 = k0 + m;
          sy += re_[k0] * im_[k1] - im_[k0] * re_[k1];
        }
      }
    }
    e -= b_khz * 2.0 * sy;
    return e / norm2_;
  }

  void refresh_energy_shift(double b_khz) { e_shift_ = mean_energy(b_khz); }

  void integrate_to(double t_ms, double end_ms) {
    int steps_since_refresh = 0;
    while (end_ms - t_ms > 1e-15 * std::max(1.0, end_ms)) {
      const double h = std::min(h_ms_, end_ms - t_ms);
      prer_ = re_;
      prei_ = im_;
      const double norm2_pre = norm2_;
      rk4_step(t_ms, h);
      if (!(norm2_ <= norm2_pre * (1.0 + 1e-9)))
        throw NumericalError("integrator failure: squared norm increased");
      if (noise_free_) {
        if (std::abs(norm2_ - 1.0) > 1e-6)
          throw NumericalError("norm drift beyond 1e-6 in noiseless evolution");
        t_ms += h;
      } else if (norm2_ < threshold_) {
        // Bisect the crossing time within this step.
        double lo = 0.0, hi = h;
        while (hi - lo > st_.jump_time_frac * h) {
          const double mid = 0.5 * (lo + hi);
          re_ = prer_;
          im_ = prei_;
          rk4_step(t_ms, mid);
          (norm2_ < threshold_ ? hi : lo) = mid;
        }
        re_ = prer_;
        im_ = prei_;
        rk4_step(t_ms, hi);
        t_ms += hi;
        apply_jump(t_ms);
        steps_since_refresh = 0;
        continue;
      } else {
        t_ms += h;
      }
      if (++steps_since_refresh >= 32) {
        refresh_energy_shift(field_at_ms(t_ms));
        steps_since_refresh = 0;
      }
    }
  }

  void renormalize() {
    const double inv = 1.0 / std::sqrt(norm2_);
    for (std::size_t k = 0; k < dim_; ++k) {
      re_[k] *= inv;
      im_[k] *= inv;
    }
    norm2_ = 1.0;
  }

  double up_weight(int slot) const {
    const std::size_t m = std::size_t{1} << slot;
    double w = 0.0;
    for (std::size_t base = 0; base < dim_; base += 2 * m)
      for (std::size_t off = 0; off < m; ++off) {
        const std::size_t k = base + off;
        w += re_[k] * re_[k] + im_[k] * im_[k];
      }
    return w;
  }

  void apply_jump(double t_ms) {
    // Channel weights are the instantaneous <c^dag c>: gamma_deph |psi|^2
    // for each dephasing channel and 2 gamma_se <P_up^i> for emission.
    std::vector<double> up(a_);
    double total = a_ * noise_.gamma_deph_per_ms * norm2_;
    for (int j = 0; j < a_; ++j) {
      up[j] = up_weight(j);
      total += 2.0 * noise_.gamma_se_per_ms * up[j];
    }
    if (!(total > 0.0))
      throw NumericalError("jump triggered with zero total channel weight");

    double x = rng_.uniform() * total;
    int slot = a_ - 1;
    bool emission = noise_.gamma_se_per_ms > 0.0;
    for (int j = 0; j < a_; ++j) {
      const double wd = noise_.gamma_deph_per_ms * norm2_;
      if (x < wd) {
        slot = j;
        emission = false;
        break;
      }
      x -= wd;
      const double we = 2.0 * noise_.gamma_se_per_ms * up[j];
      if (x < we) {
        slot = j;
        emission = true;
        break;
      }
      x -= we;
    }

    const int ion = active_[slot];
    JumpChannel channel;
    if (!emission) {
      channel = JumpChannel::kDephasing;
      const std::size_t m = std::size_t{1} << slot;
      for (std::size_t base = 0; base < dim_; base += 2 * m)
        for (std::size_t off = 0; off < m; ++off) {
          const std::size_t k = base + off + m;
          re_[k] = -re_[k];
          im_[k] = -im_[k];
        }
      renormalize();
    } else {
      // Project the register with (<up_z| + <dn_z|) on this ion: in the x
      // basis that keeps the |up> slice.
      const std::size_t m = std::size_t{1} << slot;
      const std::size_t half = dim_ >> 1;
      std::vector<double> phr(half), phi(half);
      double nrm2 = 0.0;
      std::size_t idx = 0;
      for (std::size_t base = 0; base < dim_; base += 2 * m)
        for (std::size_t off = 0; off < m; ++off, ++idx) {
          const std::size_t k = base + off;
          phr[idx] = re_[k];
          phi[idx] = im_[k];
          nrm2 += re_[k] * re_[k] + im_[k] * im_[k];
        }
      if (nrm2 < 1e-280)
        throw NumericalError("emission projection annihilated the state");
      const double u = rng_.uniform();
      if (u < noise_.p_down + noise_.p_up) {
        // Reset ion to |dn_z> = (|up>+|dn>)/sqrt(2) or |up_z> = (|up>-|dn>)/sqrt(2).
        const bool down = u < noise_.p_down;
        channel = down ? JumpChannel::kEmissionDown : JumpChannel::kEmissionUp;
        const double c = 1.0 / std::sqrt(2.0 * nrm2);
        const double cs = down ? c : -c;
        idx = 0;
        for (std::size_t base = 0; base < dim_; base += 2 * m)
          for (std::size_t off = 0; off < m; ++off, ++idx) {
            const std::size_t k0 = base + off;
            const std::size_t k1 = k0 + m;
            re_[k0] = c * phr[idx];
            im_[k0] = c * phi[idx];
            re_[k1] = cs * phr[idx];
            im_[k1] = cs * phi[idx];
          }
        norm2_ = 1.0;
      } else {
        channel = JumpChannel::kEmissionLeak;
        const double c = 1.0 / std::sqrt(nrm2);
        active_.erase(active_.begin() + slot);
        leaked_.push_back(ion);
        std::sort(leaked_.begin(), leaked_.end());
        re_.assign(phr.begin(), phr.end());
        im_.assign(phi.begin(), phi.end());
        for (std::size_t k = 0; k < half; ++k) {
          re_[k] *= c;
          im_[k] *= c;
        }
        norm2_ = 1.0;
        rebuild_tables();
      }
    }

    record_.jumps.push_back(JumpEvent{t_ms * 1e3, ion, channel});
    threshold_ = rng_.uniform_pos();
    refresh_energy_shift(field_at_ms(t_ms));
  }

  void record_sample() {
    std::vector<double> p(n_total_ + 1, 0.0);
    const int leaked = static_cast<int>(leaked_.size());
    for (std::size_t k = 0; k < dim_; ++k) {
      const int ups = a_ - std::popcount(static_cast<unsigned long long>(k));
      p[ups + leaked] += re_[k] * re_[k] + im_[k] * im_[k];
    }
    const double inv = 1.0 / norm2_;
    for (double& v : p) v *= inv;
    record_.sample_ps.push_back(std::move(p));
  }

  Eigen::MatrixXd j_khz_;
  RampSchedule ramp_;
  NoiseModel noise_;
  TrajectorySettings st_;
  double h_ms_ = 0.0;
  bool noise_free_ = true;

  int n_total_ = 0;
  std::vector<int> active_, leaked_;
  int a_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> ising_diag_, decay_half_;
  std::vector<double> re_, im_;
  std::vector<double> k1r_, k1i_, k2r_, k2i_, k3r_, k3i_, k4r_, k4i_;
  std::vector<double> yr_, yi_, prer_, prei_;
  double norm2_ = 1.0;
  double e_shift_ = 0.0;
  double threshold_ = -1.0;
  RngStream rng_{0, 0};
  TrajectoryRecord record_;
};

}  // namespace

std::vector<std::complex<double>> hamiltonian_apply(
    const SpinState& state, const Eigen::MatrixXd& j_khz_full, double b_khz) {
  const int a = state.n_active();
  const std::size_t dim = std::size_t{1} << a;
  if (state.amp.size() != dim)
    throw NumericalError("state dimension does not match active set");
  if (j_khz_full.rows() != state.n_total || j_khz_full.cols() != state.n_total)
    throw NumericalError("coupling matrix dimension mismatch");

  const std::vector<double> diag =
      ising_diagonal(j_khz_full, state.active, state.n_total);
  std::vector<std::complex<double>> out(dim);
  for (std::size_t k = 0; k < dim; ++k)
    out[k] = std::complex<double>(0.0, -kTwoPi * diag[k]) * state.amp[k];
  const double f = kTwoPi * b_khz;
  for (int j = 0; j < a; ++j) {
    const std::size_t m = std::size_t{1} << j;
    for (std::size_t base = 0; base < dim; base += 2 * m)
      for (std::size_t off = 0; off < m; ++off) {
        const std::size_t k0 = base + off;
        const std::size_t k1 = k0 + m;
        out[k0] += f * state.amp[k1];
        out[k1] -= f * state.amp[k0];
      }
  }
  return out;
}

TrajectoryRecord evolve_trajectory(SpinState state, const Eigen::MatrixXd& j_khz,
                                   const RampSchedule& ramp,
                                   const NoiseModel& noise, RngStream rng,
                                   const TrajectorySettings& settings) {
  TrajectoryEngine engine(j_khz, ramp, noise, settings);
  return engine.run(std::move(state), rng);
}

EnsembleStats run_ensemble(const EnsembleConfig& cfg, int n_traj,
                           std::uint64_t base_seed) {
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  cfg.ramp.validate();
  cfg.noise.validate();
  const int n = static_cast<int>(cfg.j_khz.rows());

  int workers = cfg.n_workers;
  if (workers <= 0)
    workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n_traj);

  const std::size_t n_samples = cfg.ramp.sample_times_us.size();
  std::vector<std::vector<std::vector<double>>> results(n_traj);
  std::vector<std::size_t> jump_counts(n_traj, 0);
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  int first_error_index = -1;

  auto work = [&]() {
    TrajectoryEngine engine(cfg.j_khz, cfg.ramp, cfg.noise, cfg.settings);
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_traj) return;
      try {
        RngStream rng(base_seed, static_cast<std::uint64_t>(i));
        SpinState state = initial_state(n, cfg.flip_error, &rng);
        TrajectoryRecord rec = engine.run(std::move(state), rng);
        jump_counts[i] = rec.jumps.size();
        results[i] = std::move(rec.sample_ps);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error || i < first_error_index) {
          first_error = std::current_exception();
          first_error_index = i;
        }
        return;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const std::exception& e) {
      throw NumericalError("trajectory " + std::to_string(first_error_index) +
                           ": " + e.what());
    }
  }

  EnsembleStats stats;
  stats.n_ions = n;
  stats.n_traj = n_traj;
  stats.base_seed = base_seed;
  stats.sample_times_us = cfg.ramp.sample_times_us;
  stats.p_mean.assign(n_samples, std::vector<double>(n + 1, 0.0));
  stats.p_sem.assign(n_samples, std::vector<double>(n + 1, 0.0));

  const int blocks = std::max(1, std::min(cfg.jackknife_blocks, n_traj));
  stats.block_p_mean.assign(
      blocks, std::vector<std::vector<double>>(
                  n_samples, std::vector<double>(n + 1, 0.0)));
  stats.block_sizes.assign(blocks, 0);

  // Sequential reduction in trajectory index order: results are identical
  // for every worker count.
  std::vector<std::vector<double>> sum2(n_samples,
                                        std::vector<double>(n + 1, 0.0));
  double total_jumps = 0.0;
  for (int i = 0; i < n_traj; ++i) {
    const int b = static_cast<int>(static_cast<long long>(i) * blocks / n_traj);
    ++stats.block_sizes[b];
    total_jumps += static_cast<double>(jump_counts[i]);
    for (std::size_t t = 0; t < n_samples; ++t) {
      for (int s = 0; s <= n; ++s) {
        const double v = results[i][t][s];
        stats.p_mean[t][s] += v;
        sum2[t][s] += v * v;
        stats.block_p_mean[b][t][s] += v;
      }
    }
  }
  for (std::size_t t = 0; t < n_samples; ++t) {
    for (int s = 0; s <= n; ++s) {
      const double mean = stats.p_mean[t][s] / n_traj;
      stats.p_mean[t][s] = mean;
      if (n_traj > 1) {
        double var = (sum2[t][s] - n_traj * mean * mean) / (n_traj - 1.0);
        stats.p_sem[t][s] = std::sqrt(std::max(0.0, var) / n_traj);
      }
    }
  }
  for (int b = 0; b < blocks; ++b)
    for (std::size_t t = 0; t < n_samples; ++t)
      for (int s = 0; s <= n; ++s)
        stats.block_p_mean[b][t][s] /= std::max(1, stats.block_sizes[b]);
  stats.mean_jumps_per_traj = total_jumps / n_traj;
  return stats;
}

}  // namespace ionsim
