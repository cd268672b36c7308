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

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "tbssim/experiments.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int report_config_error(const tbssim::ConfigError &e) {
    for (const auto &d : e.diagnostics()) {
        std::cerr << "config error: " << d.str() << "\n";
    }
    return kExitConfig;
}

int run(tbssim::ExperimentKind kind, const std::string &config_path, const std::string &out_dir,
        std::optional<uint64_t> seed) {
    try {
        tbssim::ExperimentConfig config = tbssim::ExperimentConfig::parse_file(config_path);
        if (seed) {
            config.set("run.seed", std::to_string(*seed));
        }
        tbssim::RunOutput output = tbssim::compute_experiment(kind, config);
        tbssim::write_run(output, out_dir);
        std::cout << tbssim::experiment_name(kind) << ": " << output.summary.dump() << "\n";
        return 0;
    } catch (const tbssim::ConfigError &e) {
        return report_config_error(e);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int replay(const std::string &manifest, const std::string &out_dir) {
    try {
        tbssim::ReplayResult r = tbssim::replay_manifest(manifest);
        tbssim::write_run(r.run, out_dir);
        if (!r.matches()) {
            for (const auto &m : r.mismatches) {
                std::cerr << "replay mismatch: " << m << "\n";
            }
            return kExitRuntime;
        }
        std::cout << "replay: " << tbssim::experiment_name(r.run.kind) << " reproduced\n";
        return 0;
    } catch (const tbssim::ConfigError &e) {
        return report_config_error(e);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Tunable beam splitter feed-forward simulator"};
    app.set_version_flag("--version", std::string(TBSSIM_VERSION));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<uint64_t> seed;
    std::optional<int> status;

    for (auto kind : {tbssim::ExperimentKind::fringe_scan, tbssim::ExperimentKind::hom_scan,
                      tbssim::ExperimentKind::switch_trace, tbssim::ExperimentKind::feedforward_run,
                      tbssim::ExperimentKind::lock_sim}) {
        std::string name = tbssim::experiment_name(kind);
        CLI::App *sub = app.add_subcommand(name, "Run the " + name + " experiment");
        sub->add_option("--config", config_path, "Config file (key = value)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory")->required();
        sub->add_option("--seed", seed, "Override run.seed");
        sub->callback([&, kind] { status = run(kind, config_path, out_dir, seed); });
    }

    std::string manifest;
    CLI::App *rep = app.add_subcommand("replay", "Re-run a recorded manifest and check it reproduces");
    rep->add_option("--manifest", manifest, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", out_dir, "Output directory")->required();
    rep->callback([&] { status = replay(manifest, out_dir); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    return status.value_or(0);
}
