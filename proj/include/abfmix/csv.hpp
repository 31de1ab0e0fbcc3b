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

#ifndef ABFMIX_CSV_HPP
#define ABFMIX_CSV_HPP

#include <string>
#include <string_view>
#include <vector>

namespace abfmix::csv {

/// Shortest decimal text that parses back to the same double.
std::string format(double value);

/// Parses a whole field as a double. Throws ConfigError on trailing garbage.
double parse(std::string_view field);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

}  // namespace abfmix::csv

#endif  // ABFMIX_CSV_HPP
