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

#include "tbssim/experiments.h"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tbssim/csv.h"

namespace tbssim {

namespace {

using Json = nlohmann::ordered_json;

std::string render(const std::function<void(std::ostream &)> &fill) {
    std::ostringstream out;
    fill(out);
    return out.str();
}

/// NaN and infinities become null rather than invalid JSON.
Json number(double x) {
    return std::isfinite(x) ? Json(x) : Json(nullptr);
}

void run_fringe(RunOutput &run) {
    FringeScanConfig c = run.config.fringe_scan_config();
    std::vector<FringePoint> points = fringe_scan(c);
    CountTable table;
    for (const auto &p : points) {
        table.rows.push_back(p.counts);
    }
    run.artifacts.push_back({"fringe.csv", render([&](std::ostream &o) { write_fringe_csv(o, points); })});
    run.artifacts.push_back({"counts.csv", render([&](std::ostream &o) { table.write_csv(o); })});

    Json s;
    s["configured_contrast"] = c.quality.mode_overlap;
    try {
        VisibilityFit fit = fit_visibility(points);
        s["fitted_visibility"] = number(fit.visibility);
        s["fitted_visibility_sigma"] = number(fit.visibility_sigma);
        s["phase_offset_rad"] = number(fit.phase_offset);
    } catch (const FitError &e) {
        s["fitted_visibility"] = nullptr;
        s["fit_error"] = e.what();
    }
    uint64_t heralds = 0;
    uint64_t cc = 0;
    for (const auto &r : table.rows) {
        heralds += r.singles_d3;
        cc += r.cc_13 + r.cc_23;
    }
    s["points"] = points.size();
    s["shots_per_point"] = c.shots_per_point;
    s["total_heralds"] = heralds;
    s["total_coincidences"] = cc;
    run.summary = std::move(s);
}

void run_hom(RunOutput &run) {
    HomScanConfig c = run.config.hom_scan_config();
    std::vector<HomPoint> points = hom_delay_scan(c);
    run.artifacts.push_back({"hom_scan.csv", render([&](std::ostream &o) { write_hom_csv(o, points); })});

    DipAnalysis d = analyze_dip(points);
    Json s;
    s["phi_rad"] = c.phi;
    s["gamma0_squared"] = c.gamma0 * c.gamma0;
    s["coherence_time_ns"] = c.photon1.coherence_time_ns();
    try {
        s["expected_dip_visibility"] = number(hom_dip_visibility(c.phi, c.gamma0 * overlap(c.photon1, c.photon2, 0)));
    } catch (const std::domain_error &) {
        s["expected_dip_visibility"] = nullptr;
    }
    s["baseline_counts"] = number(d.baseline);
    s["minimum_counts"] = number(d.minimum);
    s["dip_visibility"] = number(d.visibility);
    s["dip_visibility_sigma"] = number(d.visibility_sigma);
    s["chi2_flat"] = number(d.chi2_flat);
    s["chi2_threshold"] = number(d.chi2_threshold);
    s["classification"] = d.dip_detected ? "dip detected" : "no dip detected";
    run.summary = std::move(s);
}

void run_switch(RunOutput &run) {
    EomDrive drive = run.config.drive();
    Waveform w = sample_drive(drive, run.config.number("trace.start_ns"), run.config.number("trace.stop_ns"),
                              run.config.number("trace.sample_ns"));
    run.artifacts.push_back({"waveform.csv", render([&](std::ostream &o) { w.write_csv(o, "phase_rad"); })});

    Json s;
    s["sample_ns"] = run.config.number("trace.sample_ns");
    s["rise_time_ns"] = number(measure_rise_time(w));
    s["fall_time_ns"] = number(measure_fall_time(w));
    s["plateau_width_ns"] = number(measure_plateau_width(w));
    s["expected_plateau_ns"] = drive.plateau_ns();
    s["target_phase_rad"] = drive.target_phase_rad;
    run.summary = std::move(s);
}

void run_feedforward(RunOutput &run) {
    const ExperimentConfig &cfg = run.config;
    TimingConfig t = cfg.timing_config();
    uint64_t seed = cfg.seed();
    EventTimeline timeline = run_timeline(t, cfg.number("feedforward.duration_ns"), seed);
    AlignmentReport report = gate_alignment(timeline, t.drive);

    double centre = t.fpga_delay_ns();
    double half = cfg.number("feedforward.sweep_half_width_ns");
    double step = cfg.number("feedforward.sweep_step_ns");
    auto k_max = static_cast<int64_t>(std::floor(half / step + 1e-9));
    std::vector<double> delays;
    for (int64_t k = -k_max; k <= k_max; k++) {
        double d = centre + static_cast<double>(k) * step;
        if (d >= 0) {
            delays.push_back(d);
        }
    }
    std::vector<SweepPoint> sweep;
    double plateau_width = std::nan("");
    if (delays.size() >= 2) {
        sweep = fpga_delay_sweep(t, delays, cfg.number("feedforward.sweep_duration_ns"), seed, cfg.workers());
        plateau_width = plateau_width_from_sweep(sweep, 0.999);
    }

    run.artifacts.push_back({"timeline.csv", render([&](std::ostream &o) { timeline.write_csv(o); })});
    run.artifacts.push_back({"alignment.csv", render([&](std::ostream &o) {
                                 o << "pair,arrival_ns,own_gate_open_ns,experienced_phase_rad,on_plateau,"
                                      "switched_by_foreign_gate\n";
                                 for (const auto &a : report.heralded) {
                                     o << a.pair << ',' << format_double(a.arrival_ns) << ','
                                       << (a.own_gate_open_ns ? format_double(*a.own_gate_open_ns) : "") << ','
                                       << format_double(a.experienced_phase_rad) << ',' << a.on_plateau << ','
                                       << a.switched_by_foreign_gate << '\n';
                                 }
                             })});
    run.artifacts.push_back({"fpga_sweep.csv", render([&](std::ostream &o) {
                                 o << "fpga_delay_ns,on_plateau_fraction,gated_heralded\n";
                                 for (const auto &p : sweep) {
                                     o << format_double(p.fpga_delay_ns) << ',' << format_double(p.on_plateau_fraction)
                                       << ',' << p.gated_heralded << '\n';
                                 }
                             })});

    Json s;
    s["fiber_delay_ns"] = t.delays.fiber_delay_ns();
    s["fpga_delay_ns"] = centre;
    s["pairs"] = timeline.count(EventKind::pair_created);
    s["trigger_clicks"] = timeline.count(EventKind::trigger_click);
    s["gates"] = timeline.count(EventKind::gate_open);
    s["detector_clicks"] = timeline.count(EventKind::detector_click);
    s["heralded_photons"] = report.heralded_count;
    s["gated_heralded_photons"] = report.gated_heralded_count;
    s["on_plateau_fraction"] = number(report.on_plateau_fraction());
    s["on_plateau_fraction_all_heralded"] = number(report.on_plateau_fraction_all());
    s["foreign_switched_fraction"] = number(report.foreign_fraction());
    s["foreign_slots_in_gate"] = foreign_slots_in_gate(t);
    s["sweep_plateau_width_ns"] = number(plateau_width);
    run.summary = std::move(s);
}

std::string hex_float(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", x);
    return buf;
}

void run_lock_sim(RunOutput &run) {
    LockConfig c = run.config.lock_config();
    LockResult r = run_lock(c);
    run.artifacts.push_back({"lock_trace.csv", render([&](std::ostream &o) { write_lock_csv(o, r.trace); })});

    Json s;
    s["control_enabled"] = c.control_enabled;
    s["drift_kind"] = drift_kind_name(c.drift.kind);
    s["samples"] = r.samples;
    s["rms_residual_rad"] = number(r.rms_residual_rad);
    s["rms_residual_hex"] = hex_float(r.rms_residual_rad);
    s["mean_residual_rad"] = number(r.mean_residual_rad);
    s["final_residual_rad"] = number(r.final_residual_rad);
    s["lock_fraction"] = number(r.lock_fraction);
    s["contrast_factor"] = number(r.contrast_factor);
    s["max_abs_integral_term_rad"] = number(r.max_abs_integral_term);
    s["saturated"] = r.saturated;
    s["unstable"] = r.unstable;
    run.summary = std::move(s);
}

}  // namespace

RunOutput compute_experiment(ExperimentKind kind, const ExperimentConfig &config) {
    std::vector<Diagnostic> problems = validate(config);
    if (!problems.empty()) {
        throw ConfigError(std::move(problems));
    }
    RunOutput run;
    run.kind = kind;
    run.config = config;
    switch (kind) {
        case ExperimentKind::fringe_scan:
            run_fringe(run);
            break;
        case ExperimentKind::hom_scan:
            run_hom(run);
            break;
        case ExperimentKind::switch_trace:
            run_switch(run);
            break;
        case ExperimentKind::feedforward_run:
            run_feedforward(run);
            break;
        case ExperimentKind::lock_sim:
            run_lock_sim(run);
            break;
    }
    return run;
}

std::string content_digest(const std::string &content) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : content) {
        h = (h ^ ch) * 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Json make_manifest(const RunOutput &run) {
    Json m;
    m["tool"] = "tbssim";
    m["version"] = TBSSIM_VERSION;
    m["libraries"] = {
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", BOOST_LIB_VERSION},
    };
    m["experiment"] = experiment_name(run.kind);
    m["seed"] = run.config.seed();
    Json config = Json::object();
    for (const auto &key : ExperimentConfig::known_keys()) {
        config[key] = run.config.text(key);
    }
    m["config"] = std::move(config);
    Json artifacts = Json::array();
    for (const auto &a : run.artifacts) {
        artifacts.push_back({{"file", a.name}, {"bytes", a.content.size()}, {"fnv1a64", content_digest(a.content)}});
    }
    m["artifacts"] = std::move(artifacts);
    m["summary"] = run.summary;
    return m;
}

void write_run(const RunOutput &run, const std::filesystem::path &out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const auto &a : run.artifacts) {
        write_file_atomic(out_dir / a.name, [&](std::ostream &o) { o << a.content; });
    }
    std::string manifest = make_manifest(run).dump(2) + "\n";
    write_file_atomic(out_dir / "manifest.json", [&](std::ostream &o) { o << manifest; });
}

ReplayResult replay_manifest(const std::filesystem::path &manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw ConfigError({{"", 0, "cannot open manifest " + manifest_path.string()}});
    }
    Json recorded;
    std::map<std::string, std::string> values;
    ExperimentKind kind;
    try {
        recorded = Json::parse(in);
        kind = parse_experiment(recorded.at("experiment").get<std::string>());
        for (const auto &[k, v] : recorded.at("config").items()) {
            values[k] = v.get<std::string>();
        }
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError({{"", 0, std::string("malformed manifest: ") + e.what()}});
    } catch (const std::invalid_argument &e) {
        throw ConfigError({{"experiment", 0, e.what()}});
    }

    ReplayResult result{compute_experiment(kind, ExperimentConfig::from_map(values)), {}};
    Json fresh = make_manifest(result.run);
    for (const char *section : {"version", "summary", "artifacts"}) {
        if (!recorded.contains(section)) {
            result.mismatches.push_back(std::string("manifest has no '") + section + "' section");
        } else if (recorded[section] != fresh[section]) {
            result.mismatches.push_back(std::string(section) + " differs: recorded " + recorded[section].dump() +
                                        ", replayed " + fresh[section].dump());
        }
    }
    return result;
}

}  // namespace tbssim
