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

#include "tbssim/phase_lock.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "tbssim/csv.h"
#include "tbssim/random.h"

namespace tbssim {

double hene_signal(double phi_signal, double monitor_bias_rad) {
    return 0.5 * (1 + std::cos(phi_signal * kSignalWavelengthNm / kHeNeWavelengthNm + monitor_bias_rad));
}

std::string drift_kind_name(DriftKind kind) {
    switch (kind) {
        case DriftKind::none:
            return "none";
        case DriftKind::random_walk:
            return "random_walk";
        case DriftKind::sinusoidal:
            return "sinusoidal";
        case DriftKind::step:
            return "step";
    }
    return "unknown";
}

DriftKind parse_drift_kind(const std::string &name) {
    for (auto k : {DriftKind::none, DriftKind::random_walk, DriftKind::sinusoidal, DriftKind::step}) {
        if (drift_kind_name(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown drift kind '" + name + "'");
}

void DriftModel::validate() const {
    if (!(magnitude >= 0) || !std::isfinite(magnitude)) {
        throw std::invalid_argument("DriftModel: magnitude must be finite and non-negative");
    }
    if (!(timescale_s > 0) || !std::isfinite(timescale_s)) {
        throw std::invalid_argument("DriftModel: timescale must be positive");
    }
}

void PidGains::validate() const {
    if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd)) {
        throw std::invalid_argument("PidGains: gains must be finite");
    }
    if (!(sample_period_s > 0) || !std::isfinite(sample_period_s)) {
        throw std::invalid_argument("PidGains: sample period must be positive");
    }
    if (!(output_limit_rad > 0) || !std::isfinite(output_limit_rad)) {
        throw std::invalid_argument("PidGains: output limit must be positive and finite");
    }
}

PidOutput pid_step(const PidGains &gains, const PidState &state, double setpoint, double measurement) {
    const double dt = gains.sample_period_s;
    const double limit = gains.output_limit_rad;
    double error = setpoint - measurement;

    PidState next = state;
    next.integral += error * dt;
    if (gains.ki != 0) {
        double bound = limit / std::abs(gains.ki);
        next.integral = std::clamp(next.integral, -bound, bound);
    }
    double derivative = state.has_previous ? (error - state.previous_error) / dt : 0.0;
    double out = gains.kp * error + gains.ki * next.integral + gains.kd * derivative;
    next.saturated = std::abs(out) > limit;
    out = std::clamp(out, -limit, limit);
    next.previous_error = error;
    next.has_previous = true;
    return {out, next};
}

void LockConfig::validate() const {
    drift.validate();
    gains.validate();
    if (!(duration_s > 0) || !std::isfinite(duration_s)) {
        throw std::invalid_argument("LockConfig: duration must be positive");
    }
    if (!(monitor_noise >= 0)) {
        throw std::invalid_argument("LockConfig: monitor noise must be non-negative");
    }
    if (!(setpoint >= 0 && setpoint <= 1)) {
        throw std::invalid_argument("LockConfig: setpoint must lie in [0, 1]");
    }
    if (!(lock_threshold_rad > 0)) {
        throw std::invalid_argument("LockConfig: lock threshold must be positive");
    }
    if (trace_stride == 0) {
        throw std::invalid_argument("LockConfig: trace stride must be at least 1");
    }
}

LockResult run_lock(const LockConfig &config) {
    config.validate();
    const double dt = config.gains.sample_period_s;
    const auto n = static_cast<std::size_t>(std::llround(config.duration_s / dt));
    Rng rng = make_rng(config.seed, 0x6c6f636b);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double walk_step = config.drift.magnitude * std::sqrt(dt);

    LockResult r;
    r.samples = n + 1;
    r.trace.reserve(n / config.trace_stride + 1);
    double drift = 0;
    double actuator = 0;
    PidState pid;
    double sum_sq = 0;
    double sum = 0;
    double sum_cos = 0;
    std::size_t locked = 0;
    const std::size_t tenth = std::max<std::size_t>(1, (n + 1) / 10);
    double head_sq = 0;
    double tail_sq = 0;

    for (std::size_t i = 0; i <= n; i++) {
        double t = static_cast<double>(i) * dt;
        switch (config.drift.kind) {
            case DriftKind::none:
                break;
            case DriftKind::random_walk:
                if (i > 0) {
                    drift += walk_step * gauss(rng);
                }
                break;
            case DriftKind::sinusoidal:
                drift = config.drift.magnitude * std::sin(2 * std::numbers::pi * t / config.drift.timescale_s);
                break;
            case DriftKind::step:
                drift = t >= config.drift.timescale_s ? config.drift.magnitude : 0.0;
                break;
        }

        double phi = drift - actuator;
        double monitor = hene_signal(phi, config.monitor_bias_rad);
        if (config.monitor_noise > 0) {
            monitor += config.monitor_noise * gauss(rng);
        }
        if (i % config.trace_stride == 0) {
            r.trace.push_back({t, phi, monitor, actuator});
        }

        sum += phi;
        sum_sq += phi * phi;
        sum_cos += std::cos(phi);
        locked += std::abs(phi) < config.lock_threshold_rad;
        if (i < tenth) {
            head_sq += phi * phi;
        }
        if (i + tenth > n) {
            tail_sq += phi * phi;
        }
        r.final_residual_rad = phi;

        if (config.control_enabled) {
            PidOutput step = pid_step(config.gains, pid, config.setpoint, monitor);
            pid = step.state;
            actuator = step.actuator_rad;
            r.saturated = r.saturated || pid.saturated;
            r.max_abs_integral_term = std::max(r.max_abs_integral_term, std::abs(config.gains.ki * pid.integral));
        }
    }

    double count = static_cast<double>(r.samples);
    r.mean_residual_rad = sum / count;
    r.rms_residual_rad = std::sqrt(sum_sq / count);
    r.contrast_factor = sum_cos / count;
    r.lock_fraction = static_cast<double>(locked) / count;
    double head_rms = std::sqrt(head_sq / static_cast<double>(tenth));
    double tail_rms = std::sqrt(tail_sq / static_cast<double>(tenth));
    r.unstable = r.saturated || (config.control_enabled && tail_rms > 10 * head_rms && tail_rms > config.lock_threshold_rad);
    return r;
}

void write_lock_csv(std::ostream &out, std::span<const LockSample> trace) {
    out << "time_s,phi_true_rad,monitor_intensity,actuator_rad\n";
    for (const auto &s : trace) {
        out << format_double(s.time_s) << ',' << format_double(s.phi_true_rad) << ','
            << format_double(s.monitor_intensity) << ',' << format_double(s.actuator_rad) << '\n';
    }
}

}  // namespace tbssim
