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

#ifndef TBSSIM_EXPERIMENTS_H
#define TBSSIM_EXPERIMENTS_H

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tbssim/experiment_config.h"

namespace tbssim {

struct Artifact {
    std::string name;
    std::string content;
};

/// Everything a run produces, held in memory until it is written.
struct RunOutput {
    ExperimentKind kind = ExperimentKind::fringe_scan;
    ExperimentConfig config;
    std::vector<Artifact> artifacts;
    nlohmann::ordered_json summary;
};

/// Runs one experiment without touching the filesystem. Throws ConfigError
/// when validate() reports anything.
RunOutput compute_experiment(ExperimentKind kind, const ExperimentConfig &config);

/// FNV-1a of the artifact bytes, as 16 hex digits.
std::string content_digest(const std::string &content);

/// Config echo, seed, versions, artifact digests and summary. Contains no
/// timestamps or paths, so identical runs give identical manifests.
nlohmann::ordered_json make_manifest(const RunOutput &run);

/// Creates `out_dir` if needed and writes every artifact and manifest.json
/// through temporary files.
void write_run(const RunOutput &run, const std::filesystem::path &out_dir);

struct ReplayResult {
    RunOutput run;
    /// Human-readable differences between the recorded and recomputed run.
    std::vector<std::string> mismatches;

    bool matches() const { return mismatches.empty(); }
};

/// Re-runs the experiment recorded in a manifest and compares the summary
/// and artifact digests. Throws ConfigError on an unreadable manifest.
ReplayResult replay_manifest(const std::filesystem::path &manifest_path);

}  // namespace tbssim

#endif
