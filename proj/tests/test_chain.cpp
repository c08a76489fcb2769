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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ionsim/chain.hpp"
#include "ionsim/errors.hpp"

using namespace ionsim;

namespace {

TrapConfig paper_trap(int n) {
  TrapConfig cfg;
  cfg.n_ions = n;
  cfg.nu_x_khz = 4748.0;
  cfg.nu_z_khz = 1002.0;
  return cfg;
}

// Independent check for the equilibrium solver: crude projected gradient
// descent on the same potential.
std::vector<double> gradient_descent_positions(int n, int iters = 400000,
                                               double step = 2e-4) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = 0.9 * (i - 0.5 * (n - 1)) + 0.01 * i * i;
  for (int it = 0; it < iters; ++it) {
    for (int i = 0; i < n; ++i) {
      double g = x[i];
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d = x[i] - x[j];
        g -= (d > 0 ? 1.0 : -1.0) / (d * d);
      }
      x[i] -= step * g;
    }
  }
  std::sort(x.begin(), x.end());
  return x;
}

}  // namespace

TEST_CASE("single ion sits at the trap center") {
  const ChainGeometry g = equilibrium_positions(1);
  REQUIRE(g.positions.size() == 1);
  CHECK(g.positions[0] == 0.0);
}

TEST_CASE("two-ion separation matches the stationary point of the pair potential") {
  const ChainGeometry g = equilibrium_positions(2);
  const double d = std::pow(2.0, -2.0 / 3.0);
  CHECK(g.positions[0] == doctest::Approx(-d).epsilon(1e-12));
  CHECK(g.positions[1] == doctest::Approx(d).epsilon(1e-12));
}

TEST_CASE("three-ion positions match analytic and descent references") {
  const ChainGeometry g = equilibrium_positions(3);
  const double d = std::pow(1.25, 1.0 / 3.0);
  CHECK(g.positions[0] == doctest::Approx(-d).epsilon(1e-12));
  CHECK(std::abs(g.positions[1]) < 1e-12);
  CHECK(g.positions[2] == doctest::Approx(d).epsilon(1e-12));

  const std::vector<double> ref = gradient_descent_positions(3);
  for (int i = 0; i < 3; ++i)
    CHECK(g.positions[i] == doctest::Approx(ref[i]).epsilon(1e-5));
}

TEST_CASE("five-ion positions agree with the descent oracle") {
  const ChainGeometry g = equilibrium_positions(5);
  const std::vector<double> ref = gradient_descent_positions(5);
  for (int i = 0; i < 5; ++i)
    CHECK(g.positions[i] == doctest::Approx(ref[i]).epsilon(1e-5));
}

TEST_CASE("positions are ordered, mirror symmetric, and stationary") {
  for (int n : {2, 3, 4, 7, 9, 12}) {
    const ChainGeometry g = equilibrium_positions(n);
    for (int i = 0; i + 1 < n; ++i) CHECK(g.positions[i] < g.positions[i + 1]);
    for (int i = 0; i < n; ++i)
      CHECK(g.positions[i] == doctest::Approx(-g.positions[n - 1 - i]).epsilon(1e-9));
    // max-norm of the potential gradient below 1e-10
    for (int i = 0; i < n; ++i) {
      double grad = g.positions[i];
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d = g.positions[i] - g.positions[j];
        grad -= (d > 0 ? 1.0 : -1.0) / (d * d);
      }
      CHECK(std::abs(grad) < 1e-10);
    }
  }
}

TEST_CASE("mode identities: COM at nu_x, tilt at sqrt(nu_x^2 - nu_z^2)") {
  for (int n = 2; n <= 9; ++n) {
    const TrapConfig cfg = paper_trap(n);
    const ModeData modes = transverse_modes(cfg, equilibrium_positions(n));
    CHECK(modes.freq_khz[0] == doctest::Approx(cfg.nu_x_khz).epsilon(1e-9));
    const double tilt =
        std::sqrt(cfg.nu_x_khz * cfg.nu_x_khz - cfg.nu_z_khz * cfg.nu_z_khz);
    CHECK(modes.freq_khz[1] == doctest::Approx(tilt).epsilon(1e-9));
    // strictly descending
    for (int m = 0; m + 1 < n; ++m)
      CHECK(modes.freq_khz[m] > modes.freq_khz[m + 1]);
  }
}

TEST_CASE("single ion has one mode at nu_x with unit vector") {
  const TrapConfig cfg = paper_trap(1);
  const ModeData modes = transverse_modes(cfg, equilibrium_positions(1));
  REQUIRE(modes.freq_khz.size() == 1);
  CHECK(modes.freq_khz[0] == doctest::Approx(cfg.nu_x_khz).epsilon(1e-12));
  CHECK(modes.vectors(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("mode vectors are orthonormal") {
  const TrapConfig cfg = paper_trap(9);
  const ModeData modes = transverse_modes(cfg, equilibrium_positions(9));
  const Eigen::MatrixXd gram =
      modes.vectors.transpose() * modes.vectors -
      Eigen::MatrixXd::Identity(9, 9);
  CHECK(gram.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("COM Lamb-Dicke parameters are uniform and scale as 1/sqrt(N)") {
  double eta1 = 0.0;
  for (int n = 2; n <= 9; ++n) {
    const TrapConfig cfg = paper_trap(n);
    const ModeData modes = transverse_modes(cfg, equilibrium_positions(n));
    for (int i = 1; i < n; ++i)
      CHECK(modes.lamb_dicke(i, 0) ==
            doctest::Approx(modes.lamb_dicke(0, 0)).epsilon(1e-10));
    const double eta = modes.lamb_dicke(0, 0);
    if (n == 2) {
      eta1 = eta * std::sqrt(2.0);
    } else {
      CHECK(eta == doctest::Approx(eta1 / std::sqrt(n)).epsilon(1e-9));
    }
  }
}

TEST_CASE("squeezed aspect ratio destabilizes the chain") {
  TrapConfig cfg = paper_trap(9);
  cfg.nu_x_khz = 1300.0;  // way below the zigzag threshold for 9 ions
  CHECK_THROWS_AS(transverse_modes(cfg, equilibrium_positions(9)),
                  StabilityError);
}

TEST_CASE("coupling matrix symmetry, zero diagonal, mirror symmetry") {
  const TrapConfig cfg = paper_trap(9);
  const ModeData modes = transverse_modes(cfg, equilibrium_positions(9));
  const CouplingMatrix c = coupling_matrix(modes, {370.0}, cfg.nu_x_khz + 30.0);
  for (int i = 0; i < 9; ++i) {
    CHECK(c.j_khz(i, i) == 0.0);
    for (int j = 0; j < 9; ++j) {
      CHECK(c.j_khz(i, j) == doctest::Approx(c.j_khz(j, i)).epsilon(1e-14));
      CHECK(c.j_khz(i, j) ==
            doctest::Approx(c.j_khz(8 - i, 8 - j)).epsilon(1e-9));
    }
  }
}

TEST_CASE("blue of the COM mode all couplings are ferromagnetic, J/N of order 1 kHz") {
  const TrapConfig cfg = paper_trap(9);
  const ModeData modes = transverse_modes(cfg, equilibrium_positions(9));
  const CouplingMatrix c = coupling_matrix(modes, {370.0}, cfg.nu_x_khz + 30.0);
  for (int i = 0; i < 9; ++i)
    for (int j = i + 1; j < 9; ++j) CHECK(c.j_khz(i, j) > 0.0);
  const double per_site = c.mean_j_khz / 9.0;
  CHECK(per_site > 0.2);
  CHECK(per_site < 5.0);
}

TEST_CASE("two ions at the wider detuning still couple ferromagnetically") {
  const TrapConfig cfg = paper_trap(2);
  const ModeData modes = transverse_modes(cfg, equilibrium_positions(2));
  const CouplingMatrix c = coupling_matrix(modes, {370.0}, cfg.nu_x_khz + 63.0);
  CHECK(c.j_khz(0, 1) > 0.0);
}

TEST_CASE("detuning between tilt and COM flips some couplings negative") {
  const TrapConfig cfg = paper_trap(9);
  const ModeData modes = transverse_modes(cfg, equilibrium_positions(9));
  const double mu = 0.5 * (modes.freq_khz[0] + modes.freq_khz[1]);
  const CouplingMatrix c = coupling_matrix(modes, {370.0}, mu);
  bool any_negative = false;
  for (int i = 0; i < 9; ++i)
    for (int j = i + 1; j < 9; ++j) any_negative |= c.j_khz(i, j) < 0.0;
  CHECK(any_negative);
}

TEST_CASE("beatnote inside the guard band is rejected") {
  const TrapConfig cfg = paper_trap(3);
  const ModeData modes = transverse_modes(cfg, equilibrium_positions(3));
  CHECK_THROWS_AS(coupling_matrix(modes, {370.0}, modes.freq_khz[1] + 0.5),
                  ResonanceError);
}

TEST_CASE("marginal adiabatic elimination raises a warning, not an error") {
  const TrapConfig cfg = paper_trap(9);
  const ModeData modes = transverse_modes(cfg, equilibrium_positions(9));
  // 10 kHz above COM: closer than 4 eta Omega for the COM mode itself.
  const CouplingMatrix c = coupling_matrix(modes, {370.0}, cfg.nu_x_khz + 10.0);
  CHECK(!c.warnings.empty());
  const CouplingMatrix quiet =
      coupling_matrix(modes, {370.0}, cfg.nu_x_khz + 30.0);
  CHECK(quiet.warnings.empty());
}

TEST_CASE("coupling decay exponent near the reference detuning") {
  const TrapConfig cfg = paper_trap(9);
  const ModeData modes = transverse_modes(cfg, equilibrium_positions(9));
  const CouplingMatrix c = coupling_matrix(modes, {370.0}, cfg.nu_x_khz + 30.0);
  const PowerLawFit fit = fit_coupling_power_law(c);
  REQUIRE(fit.valid);
  CHECK(fit.exponent == doctest::Approx(0.35).epsilon(0.15));
  CHECK(std::abs(fit.exponent - 0.35) < 0.05);
}

TEST_CASE("far-detuned couplings approach the dipolar exponent") {
  const TrapConfig cfg = paper_trap(9);
  const std::vector<double> mus = {cfg.nu_x_khz + 30.0, cfg.nu_x_khz + 200.0,
                                   2.0 * cfg.nu_x_khz, 10.0 * cfg.nu_x_khz};
  const auto scan = coupling_range_scan(cfg, {370.0}, mus);
  REQUIRE(scan.size() == 4);
  double prev = 0.0;
  for (const auto& [mu, fit] : scan) {
    REQUIRE(fit.valid);
    CHECK(fit.exponent > prev);  // monotonically increasing toward 3
    prev = fit.exponent;
  }
  CHECK(std::abs(scan.back().second.exponent - 3.0) < 0.3);
}

TEST_CASE("power-law fit degenerates gracefully for two ions") {
  const TrapConfig cfg = paper_trap(2);
  const ModeData modes = transverse_modes(cfg, equilibrium_positions(2));
  const CouplingMatrix c = coupling_matrix(modes, {370.0}, cfg.nu_x_khz + 63.0);
  const PowerLawFit fit = fit_coupling_power_law(c);
  CHECK(!fit.valid);
  CHECK(!fit.warning.empty());
}

TEST_CASE("per-ion Rabi profile changes couplings multiplicatively") {
  const TrapConfig cfg = paper_trap(3);
  const ModeData modes = transverse_modes(cfg, equilibrium_positions(3));
  const CouplingMatrix uniform =
      coupling_matrix(modes, {370.0}, cfg.nu_x_khz + 40.0);
  const CouplingMatrix shaded =
      coupling_matrix(modes, {370.0, 370.0 * 0.99, 370.0}, cfg.nu_x_khz + 40.0);
  CHECK(shaded.j_khz(0, 1) ==
        doctest::Approx(uniform.j_khz(0, 1) * 0.99).epsilon(1e-12));
  CHECK(shaded.j_khz(0, 2) == doctest::Approx(uniform.j_khz(0, 2)).epsilon(1e-12));
  CHECK_THROWS_AS(coupling_matrix(modes, {1.0, 2.0}, cfg.nu_x_khz + 40.0),
                  ConfigError);
}

TEST_CASE("trap config validation") {
  TrapConfig cfg = paper_trap(0);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = paper_trap(2);
  cfg.nu_z_khz = 5000.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
