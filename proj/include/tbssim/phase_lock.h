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

#ifndef TBSSIM_PHASE_LOCK_H
#define TBSSIM_PHASE_LOCK_H

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace tbssim {

inline constexpr double kSignalWavelengthNm = 808;
inline constexpr double kHeNeWavelengthNm = 633;

/// Monitor intensity behind the interferometer for a signal-wavelength
/// phase phi: 0.5 (1 + cos(phi * 808/633 + bias)). The shorter He-Ne
/// wavelength turns every signal radian into 808/633 monitor radians.
double hene_signal(double phi_signal, double monitor_bias_rad = 0);

enum class DriftKind { none, random_walk, sinusoidal, step };

std::string drift_kind_name(DriftKind kind);
/// Throws std::invalid_argument on unknown names.
DriftKind parse_drift_kind(const std::string &name);

/// Interferometer phase disturbance.
///   random_walk: magnitude in rad/sqrt(s)
///   sinusoidal:  magnitude in rad, period = timescale
///   step:        magnitude in rad, applied at t = timescale
struct DriftModel {
    DriftKind kind = DriftKind::random_walk;
    double magnitude = 0.5;
    double timescale_s = 1;

    void validate() const;
};

struct PidGains {
    double kp = 0.3;
    double ki = 3.0e4;
    double kd = 0;
    /// Piezo range, symmetric about zero, in signal radians.
    double output_limit_rad = 60;
    double sample_period_s = 1e-5;

    void validate() const;
};

struct PidState {
    double integral = 0;
    double previous_error = 0;
    bool has_previous = false;
    bool saturated = false;
};

struct PidOutput {
    double actuator_rad;
    PidState state;
};

/// One update of a discrete PID on error = setpoint - measurement. The
/// integral term is clamped to the actuator range and the output is
/// saturated at it.
PidOutput pid_step(const PidGains &gains, const PidState &state, double setpoint, double measurement);

struct LockConfig {
    DriftModel drift;
    PidGains gains;
    bool control_enabled = true;
    /// Monitor phase offset that puts the 0.5 intensity setpoint on the
    /// fringe slope at signal phase 0.
    double monitor_bias_rad = std::numbers::pi / 2;
    double setpoint = 0.5;
    /// Gaussian noise on the monitor intensity.
    double monitor_noise = 0;
    /// |phi| below this counts as locked.
    double lock_threshold_rad = 0.1;
    double duration_s = 10;
    uint64_t seed = 0;
    /// Keep every n-th sample in the trace (summaries use all samples).
    std::size_t trace_stride = 1;

    void validate() const;
};

struct LockSample {
    double time_s;
    double phi_true_rad;
    double monitor_intensity;
    double actuator_rad;
};

struct LockResult {
    std::vector<LockSample> trace;
    std::size_t samples = 0;
    double rms_residual_rad = 0;
    double mean_residual_rad = 0;
    double final_residual_rad = 0;
    double lock_fraction = 0;
    /// Mean of cos(phi): the factor multiplying fringe contrast.
    double contrast_factor = 1;
    double max_abs_integral_term = 0;
    bool saturated = false;
    /// rms over the last tenth exceeds the first tenth by 10x, or the
    /// actuator railed.
    bool unstable = false;
};

/// Simulates drift and control at the PID sample period. Deterministic for
/// a given seed. Instability is reported, not thrown.
LockResult run_lock(const LockConfig &config);

void write_lock_csv(std::ostream &out, std::span<const LockSample> trace);

}  // namespace tbssim

#endif
