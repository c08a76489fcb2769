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

#include <stdexcept>
#include <string>

namespace ionsim {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid or inconsistent user input.
struct ConfigError : Error {
  using Error::Error;
};

// Iterative solver failed to converge.
struct SolverError : Error {
  using Error::Error;
};

// Chain is unstable (imaginary mode frequency) for the requested trap.
struct StabilityError : Error {
  using Error::Error;
};

// Beatnote detuning inside the guard band of a normal mode.
struct ResonanceError : Error {
  using Error::Error;
};

// Integration / numerical failure at runtime.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace ionsim
