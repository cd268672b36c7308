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

#include "tbssim/csv.h"

#include <array>
#include <charconv>
#include <fstream>
#include <stdexcept>

namespace tbssim {

std::string format_double(double x) {
    std::array<char, 64> buf;
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc()) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return std::string(buf.data(), end);
}

void write_file_atomic(const std::filesystem::path &path, const std::function<void(std::ostream &)> &fill) {
    auto tmp = path;
    tmp += ".tmp";
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) {
                throw std::runtime_error("cannot open " + tmp.string() + " for writing");
            }
            fill(out);
            out.flush();
            if (!out) {
                throw std::runtime_error("write to " + tmp.string() + " failed");
            }
        }
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw;
    }
}

}  // namespace tbssim
