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

#include "ionsim/observables.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Eigenvalues>

#include "ionsim/errors.hpp"

namespace ionsim {

void SpinDistribution::validate() const {
  if (n < 1 || static_cast<int>(p.size()) != n + 1)
    throw ConfigError("distribution must have n+1 bins");
  double sum = 0.0;
  for (double v : p) {
    if (v < -1e-12) throw ConfigError("negative probability in distribution");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("distribution does not sum to 1");
  if (!sem.empty() && sem.size() != p.size())
    throw ConfigError("sem size mismatch");
}

double magnetization(const SpinDistribution& d) {
  d.validate();
  double m = 0.0;
  for (int s = 0; s <= d.n; ++s) m += std::abs(d.n - 2.0 * s) * d.p[s];
  return m / d.n;
}

double binder_cumulant(const SpinDistribution& d) {
  d.validate();
  double m2 = 0.0, m4 = 0.0;
  for (int s = 0; s <= d.n; ++s) {
    const double mm = (d.n - 2.0 * s) * (d.n - 2.0 * s);
    m2 += mm * d.p[s];
    m4 += mm * mm * d.p[s];
  }
  if (m2 <= 0.0)
    throw NumericalError("Binder cumulant undefined: zero second moment");
  return m4 / (m2 * m2);
}

namespace {

std::vector<double> binomial_row(int n) {
  std::vector<double> c(n + 1, 0.0);
  c[0] = 1.0;
  for (int i = 1; i <= n; ++i)
    for (int j = i; j >= 1; --j) c[j] += c[j - 1];
  return c;
}

}  // namespace

double binomial_magnetization(int n) {
  const std::vector<double> c = binomial_row(n);
  double sum = 0.0;
  for (int s = 0; s <= n; ++s) sum += c[s] * std::abs(n - 2.0 * s);
  return sum / (n * std::pow(2.0, n));
}

OrderParams scale_order_params(const SpinDistribution& d) {
  if (d.n < 2)
    throw ConfigError("scaled order parameters require n >= 2");
  OrderParams out;
  out.m_x = magnetization(d);
  out.g = binder_cumulant(d);
  const double m0 = binomial_magnetization(d.n);
  const double g0 = binomial_binder(d.n);
  out.m_x_scaled = (m0 - out.m_x) / (m0 - 1.0);
  out.g_scaled = (g0 - out.g) / (g0 - 1.0);
  out.p_fm = d.p.front() + d.p.back();
  return out;
}

SpinDistribution binomial_distribution(int n) {
  SpinDistribution d;
  d.n = n;
  d.p = binomial_row(n);
  const double scale = std::pow(0.5, n);
  for (double& v : d.p) v *= scale;
  return d;
}

SpinDistribution ghz_mixture(int n) {
  SpinDistribution d;
  d.n = n;
  d.p.assign(n + 1, 0.0);
  d.p.front() = 0.5;
  d.p.back() = 0.5;
  return d;
}

DickeResult dicke_ground_state(int n, double j_khz, double b_khz) {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (j_khz < 0.0 || b_khz < 0.0) throw ConfigError("J and B must be >= 0");
  if (j_khz == 0.0 && b_khz == 0.0)
    throw ConfigError("J and B cannot both be zero");

  const double s_tot = 0.5 * n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::MatrixXd sy = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int a = 0; a <= n; ++a) {
    const double m = a - s_tot;
    h(a, a) = -(j_khz / n) * (2.0 * m * m - 0.5 * n);
    if (a < n) {
      const double ladder = 0.5 * std::sqrt(s_tot * (s_tot + 1.0) - m * (m + 1.0));
      sy(a + 1, a) = ladder;
      sy(a, a + 1) = ladder;
      h(a + 1, a) = -2.0 * b_khz * ladder;
      h(a, a + 1) = -2.0 * b_khz * ladder;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success)
    throw SolverError("total-spin ground state diagonalization failed");
  const Eigen::VectorXd& evals = solver.eigenvalues();
  Eigen::VectorXd gs = solver.eigenvectors().col(0);

  // At (numerically) degenerate B -> 0 the solver returns an arbitrary mix
  // of the two fully polarized states; select the reflection-even
  // combination, which is the B > 0 ground state's continuation.
  const double span = std::max(evals[n] - evals[0], 1.0);
  if (n >= 1 && evals[1] - evals[0] < 1e-10 * span) {
    auto reflect = [n](const Eigen::VectorXd& v) {
      Eigen::VectorXd w(n + 1);
      for (int a = 0; a <= n; ++a) w[a] = v[n - a];
      return w;
    };
    Eigen::VectorXd even = gs + reflect(gs);
    if (even.norm() < 1e-6) {
      const Eigen::VectorXd alt = solver.eigenvectors().col(1);
      even = alt + reflect(alt);
    }
    gs = even.normalized();
  }

  DickeResult out;
  out.dist.n = n;
  out.dist.p.resize(n + 1);
  for (int a = 0; a <= n; ++a) out.dist.p[a] = gs[a] * gs[a];

  const Eigen::VectorXd coupled = sy * gs;
  out.energy_gap_khz = evals[n] - evals[0];
  for (int k = 1; k <= n; ++k) {
    const double overlap = std::abs(solver.eigenvectors().col(k).dot(coupled));
    if (overlap > 1e-7 * (s_tot + 1.0)) {
      out.energy_gap_khz = evals[k] - evals[0];
      break;
    }
  }
  return out;
}

double max_slope_vs_log(const std::vector<double>& b_over_j,
                        const std::vector<double>& gbar,
                        double min_points_per_decade) {
  const std::size_t n = b_over_j.size();
  if (n != gbar.size() || n < 2)
    throw ConfigError("slope needs matching grids with >= 2 points");
  for (double b : b_over_j)
    if (!(b > 0.0)) throw ConfigError("B/|J| grid must be positive");
  const double decades =
      std::abs(std::log10(b_over_j.front() / b_over_j.back()));
  if (decades > 0.0 && (n - 1) / decades < min_points_per_decade)
    throw ConfigError("B/|J| grid too coarse for slope estimation");

  double max_slope = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dl = std::log(b_over_j[i + 1]) - std::log(b_over_j[i]);
    if (dl == 0.0) continue;
    max_slope = std::max(max_slope, std::abs((gbar[i + 1] - gbar[i]) / dl));
  }
  return max_slope;
}

namespace {

using Cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;

CMat op_on_ion(int n, int ion, const CMat& m3) {
  CMat out = CMat::Identity(1, 1);
  // Ion j owns base-3 digit j of the configuration index (ion 0 least
  // significant), matching the bit convention of the state-vector engine.
  for (int j = 0; j < n; ++j) {
    const CMat& f = (j == ion) ? m3 : CMat::Identity(3, 3);
    CMat next(out.rows() * 3, out.cols() * 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) next.block(r * out.rows(), c * out.cols(),
                                             out.rows(), out.cols()) =
          f(r, c) * out;
    out.swap(next);
  }
  return out;
}

OrderParams params_from_p(int n, const std::vector<double>& p) {
  SpinDistribution d;
  d.n = n;
  d.p = p;
  // Integration round-off can leave tiny negatives; clip for the formulas.
  double sum = 0.0;
  for (double& v : d.p) {
    v = std::max(0.0, v);
    sum += v;
  }
  for (double& v : d.p) v /= sum;
  if (n >= 2) return scale_order_params(d);
  OrderParams out;
  out.m_x = magnetization(d);
  out.g = binder_cumulant(d);
  out.m_x_scaled = std::numeric_limits<double>::quiet_NaN();
  out.g_scaled = std::numeric_limits<double>::quiet_NaN();
  out.p_fm = d.p.front() + d.p.back();
  return out;
}

}  // namespace

LindbladResult lindblad_oracle(int n, const Eigen::MatrixXd& j_khz,
                               const RampSchedule& ramp,
                               const NoiseModel& noise, double flip_error) {
  if (n < 1 || n > 3)
    throw ConfigError("density-matrix reference limited to n <= 3");
  if (j_khz.rows() != n || j_khz.cols() != n)
    throw ConfigError("coupling matrix size mismatch");
  ramp.validate();
  noise.validate();

  int dim = 1;
  for (int i = 0; i < n; ++i) dim *= 3;

  // Single-ion operators in the {|up_x>, |dn_x>, |leaked>} basis.
  CMat sx3 = CMat::Zero(3, 3), sy3 = CMat::Zero(3, 3);
  sx3(0, 0) = 1.0;
  sx3(1, 1) = -1.0;
  sy3(0, 1) = Cplx(0, -1);
  sy3(1, 0) = Cplx(0, 1);
  // Emission: project with (<up_z| + <dn_z|) = sqrt(2) <up_x|, then reset
  // the ion (or park it in the leaked level).
  CMat k_down = CMat::Zero(3, 3), k_up = CMat::Zero(3, 3),
       k_leak = CMat::Zero(3, 3);
  k_down(0, 0) = 1.0;
  k_down(1, 0) = 1.0;
  k_up(0, 0) = 1.0;
  k_up(1, 0) = -1.0;
  k_leak(2, 0) = std::sqrt(2.0);

  CMat h_ising = CMat::Zero(dim, dim);
  std::vector<CMat> sx(n), sy(n);
  for (int i = 0; i < n; ++i) {
    sx[i] = op_on_ion(n, i, sx3);
    sy[i] = op_on_ion(n, i, sy3);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      h_ising -= (j_khz(i, j) / n) * (sx[i] * sx[j]);
  CMat h_field = CMat::Zero(dim, dim);
  for (int i = 0; i < n; ++i) h_field -= sy[i];

  std::vector<CMat> c_ops;
  for (int i = 0; i < n; ++i) {
    if (noise.gamma_deph_per_ms > 0.0)
      c_ops.push_back(std::sqrt(noise.gamma_deph_per_ms) * sx[i]);
    if (noise.gamma_se_per_ms > 0.0) {
      c_ops.push_back(std::sqrt(noise.gamma_se_per_ms * noise.p_down) *
                      op_on_ion(n, i, k_down));
      c_ops.push_back(std::sqrt(noise.gamma_se_per_ms * noise.p_up) *
                      op_on_ion(n, i, k_up));
      c_ops.push_back(std::sqrt(noise.gamma_se_per_ms * noise.p_leak) *
                      op_on_ion(n, i, k_leak));
    }
  }
  CMat cdc = CMat::Zero(dim, dim);
  for (const CMat& c : c_ops) cdc += c.adjoint() * c;

  // rho0: product of (1-p)|+y><+y| + p|-y><-y| per ion.
  CMat rho = CMat::Identity(1, 1);
  Eigen::Vector3cd plus_y(1.0 / std::sqrt(2.0), Cplx(0, 1.0 / std::sqrt(2.0)),
                          0.0);
  Eigen::Vector3cd minus_y(1.0 / std::sqrt(2.0), Cplx(0, -1.0 / std::sqrt(2.0)),
                           0.0);
  CMat rho1 = (1.0 - flip_error) * (plus_y * plus_y.adjoint()) +
              flip_error * (minus_y * minus_y.adjoint());
  for (int i = 0; i < n; ++i) {
    CMat next(rho.rows() * 3, rho.cols() * 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        next.block(r * rho.rows(), c * rho.cols(), rho.rows(), rho.cols()) =
            rho1(r, c) * rho;
    rho.swap(next);
  }

  const double two_pi = 2.0 * M_PI;
  auto liouville = [&](const CMat& r, double t_ms) {
    const double b = ramp.field_at_us(t_ms * 1e3);
    CMat h = h_ising + b * h_field;
    CMat out = Cplx(0, -two_pi) * (h * r - r * h);
    for (const CMat& c : c_ops) out += c * r * c.adjoint();
    out -= 0.5 * (cdc * r + r * cdc);
    return out;
  };

  const double max_j = n > 0 ? j_khz.cwiseAbs().maxCoeff() : 0.0;
  const double rate_scale =
      two_pi * std::max(ramp.b0_khz, n * max_j) +
      n * (noise.gamma_deph_per_ms + 2.0 * noise.gamma_se_per_ms);
  const double h_ms = rate_scale > 0.0 ? 0.025 / rate_scale
                                       : std::max(ramp.t_final_us * 1e-3, 1e-3);

  LindbladResult res;
  res.sample_times_us = ramp.sample_times_us;

  auto record = [&]() {
    std::vector<double> p(n + 1, 0.0);
    for (int k = 0; k < dim; ++k) {
      int d = k, s = 0;
      for (int i = 0; i < n; ++i) {
        const int digit = d % 3;
        d /= 3;
        if (digit == 0 || digit == 2) ++s;  // up or leaked counts bright
      }
      p[s] += rho(k, k).real();
    }
    res.p.push_back(p);
    std::vector<double> sy_row(n);
    for (int i = 0; i < n; ++i) sy_row[i] = (sy[i] * rho).trace().real();
    res.sy.push_back(std::move(sy_row));
    res.params.push_back(params_from_p(n, p));
  };

  double t = 0.0;
  for (double sample_us : ramp.sample_times_us) {
    const double end = sample_us * 1e-3;
    while (end - t > 1e-15 * std::max(1.0, end)) {
      const double h = std::min(h_ms, end - t);
      const CMat r1 = liouville(rho, t);
      const CMat r2 = liouville(rho + 0.5 * h * r1, t + 0.5 * h);
      const CMat r3 = liouville(rho + 0.5 * h * r2, t + 0.5 * h);
      const CMat r4 = liouville(rho + h * r3, t + h);
      rho += (h / 6.0) * (r1 + 2.0 * (r2 + r3) + r4);
      t += h;
    }
    record();
  }
  return res;
}

OrderParamsSeries ensemble_order_params(const EnsembleStats& stats) {
  OrderParamsSeries out;
  const std::size_t n_times = stats.p_mean.size();
  const int blocks = static_cast<int>(stats.block_p_mean.size());
  out.value.reserve(n_times);
  out.sem.reserve(n_times);
  for (std::size_t t = 0; t < n_times; ++t) {
    out.value.push_back(params_from_p(stats.n_ions, stats.p_mean[t]));

    OrderParams sem{};
    if (blocks > 1) {
      std::vector<OrderParams> loo(blocks);
      for (int b = 0; b < blocks; ++b) {
        std::vector<double> p(stats.n_ions + 1);
        const double nb = stats.block_sizes[b];
        for (int s = 0; s <= stats.n_ions; ++s) {
          p[s] = (stats.n_traj * stats.p_mean[t][s] -
                  nb * stats.block_p_mean[b][t][s]) /
                 (stats.n_traj - nb);
        }
        loo[b] = params_from_p(stats.n_ions, p);
      }
      auto jack = [&](auto field) {
        double mean = 0.0;
        for (const auto& v : loo) mean += v.*field;
        mean /= blocks;
        double ss = 0.0;
        for (const auto& v : loo) {
          const double d = v.*field - mean;
          ss += d * d;
        }
        return std::sqrt(ss * (blocks - 1.0) / blocks);
      };
      sem.m_x = jack(&OrderParams::m_x);
      sem.m_x_scaled = jack(&OrderParams::m_x_scaled);
      sem.g = jack(&OrderParams::g);
      sem.g_scaled = jack(&OrderParams::g_scaled);
      sem.p_fm = jack(&OrderParams::p_fm);
    }
    out.sem.push_back(sem);
  }
  return out;
}

}  // namespace ionsim
