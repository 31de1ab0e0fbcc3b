// Copyright 2026 The abfmix Authors
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

#ifndef ABFMIX_ERROR_HPP
#define ABFMIX_ERROR_HPP

#include <stdexcept>
#include <string>

namespace abfmix {

/// Invalid user input: malformed files, inconsistent settings, bad arguments.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced a non-finite value or could not proceed.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter vector outside the support of the target density.
class OutOfSupport : public std::domain_error {
 public:
  OutOfSupport() : std::domain_error("parameter vector is out of support") {}
  using std::domain_error::domain_error;
};

}  // namespace abfmix

#endif  // ABFMIX_ERROR_HPP
