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

#include "tbssim/experiment_config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tbssim/csv.h"

namespace tbssim {

namespace {

enum class ValueType { number, integer, boolean, number_or_auto, polarization, drift_kind };

struct KeySpec {
    const char *key;
    const char *default_value;
    ValueType type;
};

// clang-format off
const KeySpec kSchema[] = {
    {"run.seed",                      "1",                  ValueType::integer},
    {"run.workers",                   "0",                  ValueType::integer},

    {"source.pump_period_ns",         "12.5",               ValueType::number},
    {"source.pair_probability",       "0.001",              ValueType::number},
    {"source.input_polarization",     "H",                  ValueType::polarization},

    {"tbs.contrast",                  "0.959",              ValueType::number},
    {"tbs.insertion_loss",            "0",                  ValueType::number},
    {"tbs.phase_jitter_rad",          "0",                  ValueType::number},

    {"scan.points",                   "16",                 ValueType::integer},
    {"scan.phi_start_rad",            "0",                  ValueType::number},
    {"scan.phi_stop_rad",             "6.283185307179586",  ValueType::number},
    {"scan.shots_per_point",          "100000",             ValueType::integer},

    {"detector.d1_efficiency",        "1",                  ValueType::number},
    {"detector.d2_efficiency",        "1",                  ValueType::number},
    {"detector.d3_efficiency",        "1",                  ValueType::number},
    {"detector.dark_rate_hz",         "0",                  ValueType::number},
    {"detector.dead_time_ns",         "0",                  ValueType::number},
    {"detector.window_ns",            "3",                  ValueType::number},

    {"hom.phi_rad",                   "1.5707963267948966", ValueType::number},
    {"hom.gamma0_squared",            "0.887",              ValueType::number},
    {"hom.center_wavelength_nm",      "808",                ValueType::number},
    {"hom.bandwidth_nm",              "3",                  ValueType::number},
    {"hom.wavelength_mismatch_nm",    "0",                  ValueType::number},
    {"hom.points",                    "21",                 ValueType::integer},
    {"hom.delay_span_ns",             "0.003",              ValueType::number},
    {"hom.shots_per_point",           "100000",             ValueType::integer},

    {"eom.on_time_ns",                "20",                 ValueType::number},
    {"eom.rise_time_ns",              "5.6",                ValueType::number},
    {"eom.fall_time_ns",              "5.6",                ValueType::number},
    {"eom.offset_ns",                 "110.4",              ValueType::number},
    {"eom.target_phase_rad",          "3.141592653589793",  ValueType::number},
    {"eom.max_rate_mhz",              "2.5",                ValueType::number},

    {"trace.start_ns",                "100",                ValueType::number},
    {"trace.stop_ns",                 "160",                ValueType::number},
    {"trace.sample_ns",               "0.1",                ValueType::number},

    {"chain.fiber_length_m",          "100",                ValueType::number},
    {"chain.group_index",             "1.468",              ValueType::number},
    {"chain.detector_latency_ns",     "110.4",              ValueType::number},
    {"chain.fpga_delay_ns",           "auto",               ValueType::number_or_auto},
    {"chain.cable_delay_ns",          "0",                  ValueType::number},

    {"feedforward.duration_ns",       "1000000",            ValueType::number},
    {"feedforward.sweep_half_width_ns", "20",               ValueType::number},
    {"feedforward.sweep_step_ns",     "1",                  ValueType::number},
    {"feedforward.sweep_duration_ns", "20000000",           ValueType::number},

    {"lock.enabled",                  "true",               ValueType::boolean},
    {"lock.drift_kind",               "random_walk",        ValueType::drift_kind},
    {"lock.drift_magnitude",          "0.5",                ValueType::number},
    {"lock.drift_timescale_s",        "1",                  ValueType::number},
    {"lock.kp",                       "0.3",                ValueType::number},
    {"lock.ki",                       "30000",              ValueType::number},
    {"lock.kd",                       "0",                  ValueType::number},
    {"lock.output_limit_rad",         "60",                 ValueType::number},
    {"lock.sample_period_s",          "1e-05",              ValueType::number},
    {"lock.duration_s",               "10",                 ValueType::number},
    {"lock.monitor_noise",            "0",                  ValueType::number},
    {"lock.monitor_bias_rad",         "1.5707963267948966", ValueType::number},
    {"lock.threshold_rad",            "0.1",                ValueType::number},
    {"lock.trace_stride",             "100",                ValueType::integer},
};
// clang-format on

const KeySpec *find_key(const std::string &key) {
    for (const auto &k : kSchema) {
        if (key == k.key) {
            return &k;
        }
    }
    return nullptr;
}

std::string trim(const std::string &s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string &s, double &out) {
    const char *end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end && std::isfinite(out);
}

bool parse_int(const std::string &s, int64_t &out) {
    const char *end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end;
}

std::string type_error(const std::string &value, ValueType type) {
    bool ok = false;
    const char *expected = "";
    double d;
    int64_t i;
    switch (type) {
        case ValueType::number:
            ok = parse_double(value, d);
            expected = "a finite number";
            break;
        case ValueType::integer:
            ok = parse_int(value, i);
            expected = "an integer";
            break;
        case ValueType::boolean:
            ok = value == "true" || value == "false";
            expected = "true or false";
            break;
        case ValueType::number_or_auto:
            ok = value == "auto" || parse_double(value, d);
            expected = "a number or 'auto'";
            break;
        case ValueType::polarization:
            ok = value.size() == 1 && std::string("HVDARL").find(value[0]) != std::string::npos;
            expected = "one of H, V, D, A, R, L";
            break;
        case ValueType::drift_kind:
            try {
                parse_drift_kind(value);
                ok = true;
            } catch (const std::invalid_argument &) {
            }
            expected = "one of none, random_walk, sinusoidal, step";
            break;
    }
    if (ok) {
        return "";
    }
    return "value '" + value + "' is not " + expected;
}

/// (alpha, beta) in the +-45 basis.
std::pair<Complex, Complex> polarization_amplitudes(char name) {
    const double h = std::numbers::sqrt2 / 2;
    switch (name) {
        case 'H':
            return {h, h};
        case 'V':
            return {h, -h};
        case 'D':
            return {1, 0};
        case 'A':
            return {0, 1};
        case 'R':
            return {h, Complex(0, h)};
        case 'L':
            return {h, Complex(0, -h)};
    }
    throw std::invalid_argument("unknown polarization");
}

}  // namespace

std::string experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::fringe_scan:
            return "fringe_scan";
        case ExperimentKind::hom_scan:
            return "hom_scan";
        case ExperimentKind::switch_trace:
            return "switch_trace";
        case ExperimentKind::feedforward_run:
            return "feedforward_run";
        case ExperimentKind::lock_sim:
            return "lock_sim";
    }
    return "unknown";
}

ExperimentKind parse_experiment(const std::string &name) {
    for (auto k : {ExperimentKind::fringe_scan, ExperimentKind::hom_scan, ExperimentKind::switch_trace,
                   ExperimentKind::feedforward_run, ExperimentKind::lock_sim}) {
        if (experiment_name(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown experiment '" + name + "'");
}

std::string Diagnostic::str() const {
    std::string out;
    if (line > 0) {
        out += "line " + std::to_string(line) + ": ";
    }
    if (!key.empty()) {
        out += key + ": ";
    }
    return out + message;
}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic> &diagnostics) {
    std::string out;
    for (const auto &d : diagnostics) {
        if (!out.empty()) {
            out += "\n";
        }
        out += d.str();
    }
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {
}

ExperimentConfig::ExperimentConfig() {
    for (const auto &k : kSchema) {
        values_[k.key] = k.default_value;
    }
}

const std::vector<std::string> &ExperimentConfig::known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto &k : kSchema) {
            out.emplace_back(k.key);
        }
        return out;
    }();
    return keys;
}

void ExperimentConfig::set(const std::string &key, const std::string &value, int line) {
    const KeySpec *spec = find_key(key);
    if (!spec) {
        throw ConfigError({{key, line, "unknown key"}});
    }
    std::string err = type_error(value, spec->type);
    if (!err.empty()) {
        throw ConfigError({{key, line, err}});
    }
    values_[key] = value;
}

ExperimentConfig ExperimentConfig::parse(std::istream &in) {
    ExperimentConfig config;
    std::vector<Diagnostic> errors;
    std::map<std::string, int> seen;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        line++;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#') {
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) {
            errors.push_back({"", line, "expected 'key = value'"});
            continue;
        }
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) {
            errors.push_back({"", line, "missing key before '='"});
            continue;
        }
        if (auto prev = seen.find(key); prev != seen.end()) {
            errors.push_back({key, line, "duplicate key (first set on line " + std::to_string(prev->second) + ")"});
            continue;
        }
        seen[key] = line;
        try {
            config.set(key, value, line);
        } catch (const ConfigError &e) {
            errors.insert(errors.end(), e.diagnostics().begin(), e.diagnostics().end());
        }
    }
    if (!errors.empty()) {
        throw ConfigError(std::move(errors));
    }
    return config;
}

ExperimentConfig ExperimentConfig::parse_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError({{"", 0, "cannot open config file " + path.string()}});
    }
    return parse(in);
}

ExperimentConfig ExperimentConfig::from_map(const std::map<std::string, std::string> &values) {
    ExperimentConfig config;
    std::vector<Diagnostic> errors;
    for (const auto &[k, v] : values) {
        try {
            config.set(k, v);
        } catch (const ConfigError &e) {
            errors.insert(errors.end(), e.diagnostics().begin(), e.diagnostics().end());
        }
    }
    if (!errors.empty()) {
        throw ConfigError(std::move(errors));
    }
    return config;
}

std::string ExperimentConfig::text(const std::string &key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw std::out_of_range("ExperimentConfig: unknown key " + key);
    }
    return it->second;
}

double ExperimentConfig::number(const std::string &key) const {
    double d;
    if (!parse_double(text(key), d)) {
        throw ConfigError({{key, 0, "value '" + text(key) + "' is not a number"}});
    }
    return d;
}

int64_t ExperimentConfig::integer(const std::string &key) const {
    int64_t i;
    if (!parse_int(text(key), i)) {
        throw ConfigError({{key, 0, "value '" + text(key) + "' is not an integer"}});
    }
    return i;
}

bool ExperimentConfig::boolean(const std::string &key) const {
    return text(key) == "true";
}

std::string ExperimentConfig::to_text() const {
    std::string out;
    for (const auto &k : kSchema) {
        out += std::string(k.key) + " = " + values_.at(k.key) + "\n";
    }
    return out;
}

uint64_t ExperimentConfig::seed() const {
    return static_cast<uint64_t>(integer("run.seed"));
}

unsigned ExperimentConfig::workers() const {
    return static_cast<unsigned>(std::max<int64_t>(0, integer("run.workers")));
}

EomDrive ExperimentConfig::drive() const {
    EomDrive d;
    d.on_time_ns = number("eom.on_time_ns");
    d.rise_time_ns = number("eom.rise_time_ns");
    d.fall_time_ns = number("eom.fall_time_ns");
    d.offset_ns = number("eom.offset_ns");
    d.target_phase_rad = number("eom.target_phase_rad");
    return d;
}

HeraldedSetup ExperimentConfig::heralded_setup() const {
    HeraldedSetup s;
    DetectorModel base;
    base.dark_count_rate_hz = number("detector.dark_rate_hz");
    base.dead_time_ns = number("detector.dead_time_ns");
    s.d1 = s.d2 = s.d3 = base;
    s.d1.efficiency = number("detector.d1_efficiency");
    s.d2.efficiency = number("detector.d2_efficiency");
    s.d3.efficiency = number("detector.d3_efficiency");
    s.insertion_survival = 1 - number("tbs.insertion_loss");
    s.window_ns = number("detector.window_ns");
    return s;
}

FringeScanConfig ExperimentConfig::fringe_scan_config() const {
    FringeScanConfig c;
    auto n = integer("scan.points");
    double start = number("scan.phi_start_rad");
    double stop = number("scan.phi_stop_rad");
    for (int64_t k = 0; k < n; k++) {
        c.phis.push_back(start + (stop - start) * static_cast<double>(k) / static_cast<double>(n));
    }
    auto [alpha, beta] = polarization_amplitudes(text("source.input_polarization")[0]);
    c.alpha = alpha;
    c.beta = beta;
    c.quality.mode_overlap = number("tbs.contrast");
    c.shots_per_point = static_cast<uint64_t>(std::max<int64_t>(0, integer("scan.shots_per_point")));
    c.setup = heralded_setup();
    c.phase_jitter_rad = number("tbs.phase_jitter_rad");
    c.seed = seed();
    c.workers = workers();
    return c;
}

HomScanConfig ExperimentConfig::hom_scan_config() const {
    HomScanConfig c;
    auto n = integer("hom.points");
    double span = number("hom.delay_span_ns");
    for (int64_t k = 0; k < n; k++) {
        double f = n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.5;
        c.delays_ns.push_back(-span / 2 + span * f);
    }
    c.phi = number("hom.phi_rad");
    c.photon1.center_wavelength_nm = number("hom.center_wavelength_nm");
    c.photon1.bandwidth_fwhm_nm = number("hom.bandwidth_nm");
    c.photon2 = c.photon1;
    c.photon2.center_wavelength_nm += number("hom.wavelength_mismatch_nm");
    c.gamma0 = std::sqrt(std::max(0.0, number("hom.gamma0_squared")));
    c.shots_per_point = static_cast<uint64_t>(std::max<int64_t>(0, integer("hom.shots_per_point")));
    c.efficiency_e = number("detector.d2_efficiency");
    c.efficiency_f = number("detector.d1_efficiency");
    c.seed = seed();
    c.workers = workers();
    return c;
}

TimingConfig ExperimentConfig::timing_config() const {
    TimingConfig c;
    c.pump_period_ns = number("source.pump_period_ns");
    c.pair_probability = number("source.pair_probability");
    HeraldedSetup s = heralded_setup();
    c.trigger_detector = s.d3;
    c.detector_f = s.d1;
    c.detector_e = s.d2;
    c.delays.fiber_length_m = number("chain.fiber_length_m");
    c.delays.fiber_group_index = number("chain.group_index");
    c.delays.detector_latency_ns = number("chain.detector_latency_ns");
    c.delays.cable_delay_ns = number("chain.cable_delay_ns");
    if (text("chain.fpga_delay_ns") != "auto") {
        c.delays.fpga_delay_ns = number("chain.fpga_delay_ns");
    }
    c.drive = drive();
    c.max_gate_rate_mhz = number("eom.max_rate_mhz");
    return c;
}

LockConfig ExperimentConfig::lock_config() const {
    LockConfig c;
    c.control_enabled = boolean("lock.enabled");
    c.drift.kind = parse_drift_kind(text("lock.drift_kind"));
    c.drift.magnitude = number("lock.drift_magnitude");
    c.drift.timescale_s = number("lock.drift_timescale_s");
    c.gains.kp = number("lock.kp");
    c.gains.ki = number("lock.ki");
    c.gains.kd = number("lock.kd");
    c.gains.output_limit_rad = number("lock.output_limit_rad");
    c.gains.sample_period_s = number("lock.sample_period_s");
    c.duration_s = number("lock.duration_s");
    c.monitor_noise = number("lock.monitor_noise");
    c.monitor_bias_rad = number("lock.monitor_bias_rad");
    c.lock_threshold_rad = number("lock.threshold_rad");
    c.trace_stride = static_cast<std::size_t>(std::max<int64_t>(0, integer("lock.trace_stride")));
    c.seed = seed();
    return c;
}

std::vector<Diagnostic> validate(const ExperimentConfig &config) {
    std::vector<Diagnostic> out;
    auto num = [&](const char *k) { return config.number(k); };
    auto unit_range = [&](const char *k) {
        double v = num(k);
        if (!(v >= 0 && v <= 1)) {
            out.push_back({k, 0, "value " + format_double(v) + " is outside [0, 1]"});
        }
    };
    auto positive = [&](const char *k) {
        double v = num(k);
        if (!(v > 0)) {
            out.push_back({k, 0, "value " + format_double(v) + " must be positive"});
        }
    };
    auto non_negative = [&](const char *k) {
        double v = num(k);
        if (!(v >= 0)) {
            out.push_back({k, 0, "value " + format_double(v) + " must be non-negative"});
        }
    };
    auto at_least = [&](const char *k, int64_t lo) {
        int64_t v = config.integer(k);
        if (v < lo) {
            out.push_back({k, 0, "value " + std::to_string(v) + " must be at least " + std::to_string(lo)});
        }
    };

    try {
        for (const char *k : {"source.pair_probability", "tbs.contrast", "tbs.insertion_loss", "detector.d1_efficiency",
                              "detector.d2_efficiency", "detector.d3_efficiency", "hom.gamma0_squared"}) {
            unit_range(k);
        }
        for (const char *k :
             {"source.pump_period_ns", "detector.window_ns", "hom.center_wavelength_nm", "hom.bandwidth_nm",
              "hom.delay_span_ns", "eom.on_time_ns", "eom.rise_time_ns", "eom.fall_time_ns", "eom.max_rate_mhz",
              "trace.sample_ns", "chain.group_index", "feedforward.duration_ns", "feedforward.sweep_step_ns",
              "feedforward.sweep_duration_ns", "lock.output_limit_rad", "lock.sample_period_s", "lock.duration_s",
              "lock.drift_timescale_s", "lock.threshold_rad"}) {
            positive(k);
        }
        for (const char *k : {"tbs.phase_jitter_rad", "detector.dark_rate_hz", "detector.dead_time_ns",
                              "eom.offset_ns", "chain.fiber_length_m", "chain.detector_latency_ns",
                              "chain.cable_delay_ns", "feedforward.sweep_half_width_ns", "lock.drift_magnitude",
                              "lock.monitor_noise"}) {
            non_negative(k);
        }
        at_least("scan.points", 4);
        at_least("scan.shots_per_point", 1);
        at_least("hom.points", 3);
        at_least("hom.shots_per_point", 1);
        at_least("lock.trace_stride", 1);
        at_least("run.workers", 0);
        at_least("run.seed", 0);

        double on = num("eom.on_time_ns");
        double rise = num("eom.rise_time_ns");
        double fall = num("eom.fall_time_ns");
        if (on < rise + fall) {
            out.push_back({"eom.on_time_ns", 0,
                           "on time " + format_double(on) + " ns is shorter than rise time " + format_double(rise) +
                               " ns + fall time " + format_double(fall) + " ns"});
        }

        int64_t points = config.integer("scan.points");
        double start = num("scan.phi_start_rad");
        double stop = num("scan.phi_stop_rad");
        if (points >= 2) {
            double spanned = (stop - start) * static_cast<double>(points - 1) / static_cast<double>(points);
            if (!(std::abs(spanned) > std::numbers::pi)) {
                out.push_back({"scan.phi_stop_rad", 0,
                               "scan points span " + format_double(std::abs(spanned)) +
                                   " rad; the visibility fit needs more than pi"});
            }
        }

        if (!(num("trace.stop_ns") > num("trace.start_ns"))) {
            out.push_back({"trace.stop_ns", 0, "must be after trace.start_ns"});
        }

        double period = num("source.pump_period_ns");
        double request_rate_mhz = num("source.pair_probability") * num("detector.d3_efficiency") / period * 1e3;
        double cap = num("eom.max_rate_mhz");
        if (period > 0 && request_rate_mhz > cap) {
            out.push_back({"source.pair_probability", 0,
                           "mean gate request rate " + format_double(request_rate_mhz) +
                               " MHz exceeds the EOM repetition limit of " + format_double(cap) + " MHz"});
        }

        if (config.text("chain.fpga_delay_ns") != "auto") {
            non_negative("chain.fpga_delay_ns");
        } else if (out.empty()) {
            TimingConfig t = config.timing_config();
            if (centered_fpga_delay(t) < 0) {
                out.push_back({"chain.fpga_delay_ns", 0,
                               "chain latencies exceed the fiber delay; no non-negative delay centres the gate"});
            }
        }
    } catch (const std::exception &e) {
        out.push_back({"", 0, e.what()});
    }
    return out;
}

}  // namespace tbssim
