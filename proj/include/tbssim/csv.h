// Copyright 2026 The tbssim Authors
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

#ifndef TBSSIM_CSV_H
#define TBSSIM_CSV_H

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

namespace tbssim {

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);

/// Writes a file through a temporary sibling and renames it into place, so
/// readers never observe a partially written artifact. The temporary is
/// removed if `fill` throws.
void write_file_atomic(const std::filesystem::path &path, const std::function<void(std::ostream &)> &fill);

}  // namespace tbssim

#endif
