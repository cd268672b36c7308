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

#ifndef TBSSIM_EXPERIMENT_CONFIG_H
#define TBSSIM_EXPERIMENT_CONFIG_H

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tbssim/control_timing.h"
#include "tbssim/phase_lock.h"
#include "tbssim/tbs.h"
#include "tbssim/two_photon.h"

namespace tbssim {

enum class ExperimentKind { fringe_scan, hom_scan, switch_trace, feedforward_run, lock_sim };

std::string experiment_name(ExperimentKind kind);
/// Throws std::invalid_argument on unknown names.
ExperimentKind parse_experiment(const std::string &name);

struct Diagnostic {
    std::string key;
    /// 1-based line in the config file, 0 when not tied to a line.
    int line = 0;
    std::string message;

    std::string str() const;
};

class ConfigError : public std::runtime_error {
   public:
    explicit ConfigError(std::vector<Diagnostic> diagnostics);

    const std::vector<Diagnostic> &diagnostics() const { return diagnostics_; }

   private:
    std::vector<Diagnostic> diagnostics_;
};

/// Flat `section.key = value` configuration. Every key has a default; a
/// file only lists the keys it overrides. Lines starting with '#' are
/// comments.
class ExperimentConfig {
   public:
    /// Every known key at its default value.
    ExperimentConfig();

    /// Throws ConfigError listing every malformed line, unknown key,
    /// duplicate key and unparsable value.
    static ExperimentConfig parse(std::istream &in);
    static ExperimentConfig parse_file(const std::filesystem::path &path);
    /// From a key -> text map (manifest replay). Same errors as parse.
    static ExperimentConfig from_map(const std::map<std::string, std::string> &values);

    static const std::vector<std::string> &known_keys();

    /// Throws ConfigError on unknown keys or values of the wrong type.
    void set(const std::string &key, const std::string &value, int line = 0);

    const std::map<std::string, std::string> &values() const { return values_; }
    std::string text(const std::string &key) const;
    double number(const std::string &key) const;
    int64_t integer(const std::string &key) const;
    bool boolean(const std::string &key) const;

    /// Canonical `key = value` listing of every key.
    std::string to_text() const;

    uint64_t seed() const;
    unsigned workers() const;

    EomDrive drive() const;
    HeraldedSetup heralded_setup() const;
    FringeScanConfig fringe_scan_config() const;
    HomScanConfig hom_scan_config() const;
    TimingConfig timing_config() const;
    LockConfig lock_config() const;

   private:
    std::map<std::string, std::string> values_;
};

/// Range and physics sanity checks. Never throws; an empty list means the
/// configuration is runnable.
std::vector<Diagnostic> validate(const ExperimentConfig &config);

}  // namespace tbssim

#endif
