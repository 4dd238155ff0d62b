// Copyright 2026 The JoPEQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef JOPEQ_ERRORS_HPP_
#define JOPEQ_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace jopeq {

// Invalid parameters or inconsistent component configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine failed to converge or produced unusable values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested privacy mechanism cannot be realised on the given lattice,
// e.g. because the quantization error alone exceeds the target noise.
class MechanismInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Root finding for mechanism parameters found no bracket.
class InfeasibleParameters : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A serialized or in-memory encoded update does not match the codebook.
class CorruptPayload : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training blew up (loss gap above the divergence threshold).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace jopeq

#endif  // JOPEQ_ERRORS_HPP_
