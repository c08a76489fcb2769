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

#pragma once

#include <cmath>

namespace ionsim {

inline constexpr double kHbar = 1.054571817e-34;     // J s
inline constexpr double kAmuKg = 1.66053906660e-27;  // kg per atomic mass unit
inline constexpr double kYb171MassAmu = 170.936323;

// Detection / Raman wavelength for 171Yb+ (m).
inline constexpr double kYbWavelengthM = 369.5e-9;

// Two beams intersecting at right angles: |dk| = sqrt(2) * 2*pi/lambda.
inline double default_delta_k() {
  return std::sqrt(2.0) * 2.0 * M_PI / kYbWavelengthM;
}

}  // namespace ionsim
