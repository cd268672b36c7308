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

#ifndef TBSSIM_CONTROL_TIMING_H
#define TBSSIM_CONTROL_TIMING_H

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tbssim/detection.h"

namespace tbssim {

/// Phase drive applied to the EOM pair after a gate request.
///
/// Each edge is a symmetric smoothstep whose full span is twice its 10-90%
/// time. on_time is measured between the 50% points of the two edges, so
/// the exact-target plateau lasts on_time - rise - fall and the whole
/// excursion lasts on_time + rise + fall.
struct EomDrive {
    double on_time_ns = 20;
    double rise_time_ns = 5.6;
    double fall_time_ns = 5.6;
    /// Start of switching on the standalone switch_trace time axis.
    double offset_ns = 110.4;
    double target_phase_rad = 3.141592653589793;

    /// Throws std::invalid_argument on non-positive durations or when
    /// on_time < rise + fall.
    void validate() const;

    double plateau_ns() const { return on_time_ns - rise_time_ns - fall_time_ns; }
    /// From gate open until the phase is back to zero.
    double total_span_ns() const { return on_time_ns + rise_time_ns + fall_time_ns; }
    /// Offset of the plateau centre from gate open.
    double plateau_center_ns() const { return 2 * rise_time_ns + plateau_ns() / 2; }
};

/// Normalized edge shape on [0, 1]: the regularized incomplete beta
/// function I_u(k, k), with k fixed so the 10-90% width is exactly 1/2.
double ramp_shape(double u);
double ramp_shape_order();

/// Phase seen at time t by light in the modulators when the gate opened at
/// gate_open_ns. Zero before the gate and after the fall.
double phase_at(const EomDrive &drive, double gate_open_ns, double t_ns);

/// Delay elements of the feed-forward chain.
struct ChainDelays {
    double fiber_length_m = 100;
    double fiber_group_index = 1.468;
    /// Includes the fixed 110.4 ns electronics latency.
    double detector_latency_ns = 110.4;
    /// Programmable delay. Unset means "centre photon 2 on the plateau".
    std::optional<double> fpga_delay_ns;
    double cable_delay_ns = 0;

    void validate() const;
    double fiber_delay_ns() const;
};

struct TimingConfig {
    double pump_period_ns = 12.5;
    double pair_probability = 1e-3;
    DetectorModel trigger_detector;
    DetectorModel detector_f;
    DetectorModel detector_e;
    ChainDelays delays;
    EomDrive drive;
    double max_gate_rate_mhz = 2.5;
    /// Emit one pump_pulse event per pulse. Long sweeps turn this off.
    bool record_pump_pulses = true;

    void validate() const;
    /// Resolved programmable delay (auto-centred when unset).
    double fpga_delay_ns() const;
    double min_gate_spacing_ns() const { return 1000.0 / max_gate_rate_mhz; }
};

/// fpga delay that puts photon 2 at the middle of the plateau.
double centered_fpga_delay(const TimingConfig &config);

enum class EventKind : int {
    pump_pulse = 0,
    pair_created,
    trigger_click,
    gate_open,
    gate_close,
    photon2_at_tbs,
    detector_click,
};

std::string event_kind_name(EventKind kind);

struct TimelineEvent {
    double time_ns = 0;
    EventKind kind = EventKind::pump_pulse;
    int64_t pulse = -1;
    /// -1 for events not tied to a pair (dark triggers, pump pulses).
    int64_t pair = -1;
    /// detector_click: 1 for D1 (output f), 2 for D2 (output e).
    int detector = 0;
    /// photon2_at_tbs and detector_click: phase experienced in the TBS.
    double phase_rad = 0;
    /// trigger_click: whether its gate request was accepted.
    bool accepted = false;

    std::string payload() const;
};

struct EventTimeline {
    std::vector<TimelineEvent> events;

    std::size_t count(EventKind kind) const;
    void write_csv(std::ostream &out) const;
};

/// Discrete-event run of the heralded feed-forward chain for pump pulses in
/// [0, duration). Deterministic given the seed. Throws std::invalid_argument
/// on invalid configuration.
EventTimeline run_timeline(const TimingConfig &config, double duration_ns, uint64_t seed);

struct RateLimitResult {
    struct Rejection {
        double time_ns;
        std::string reason;
    };
    std::vector<double> accepted;
    std::vector<Rejection> rejected;
    /// One flag per request, in input order.
    std::vector<bool> accepted_mask;
};

/// Greedily accepts sorted requests spaced at least min_spacing_ns after the
/// previously accepted one. Throws std::invalid_argument on unsorted input.
RateLimitResult rate_limit(std::span<const double> requests, double min_spacing_ns);

struct PhotonAlignment {
    int64_t pair;
    double arrival_ns;
    /// Gate opened by this photon's own trigger, if the request was accepted.
    std::optional<double> own_gate_open_ns;
    double experienced_phase_rad;
    bool on_plateau;
    /// The phase came from a gate opened by a different pair's trigger.
    bool switched_by_foreign_gate;
};

struct AlignmentReport {
    std::vector<PhotonAlignment> heralded;
    std::size_t heralded_count = 0;
    std::size_t gated_heralded_count = 0;
    std::size_t on_plateau_count = 0;
    /// Photons (heralded or not) that saw a nonzero phase.
    std::size_t switched_photons = 0;
    /// Of those, how many were switched by another pair's gate.
    std::size_t switched_by_foreign_gate = 0;

    /// on_plateau / heralded photons whose own gate request was accepted.
    double on_plateau_fraction() const;
    /// on_plateau / all heralded photons.
    double on_plateau_fraction_all() const;
    double foreign_fraction() const;
};

/// For each heralded photon, the phase it actually experienced and whether
/// it arrived on the flat top.
AlignmentReport gate_alignment(const EventTimeline &timeline, const EomDrive &drive);

/// Number of other pump pulses whose photon 2 would arrive while a gate
/// aligned for pulse 0 is nonzero.
int foreign_slots_in_gate(const TimingConfig &config);

struct SweepPoint {
    double fpga_delay_ns;
    double on_plateau_fraction;
    std::size_t gated_heralded;
};

/// Re-runs the timeline (same seed) for each programmable delay.
std::vector<SweepPoint> fpga_delay_sweep(TimingConfig config, std::span<const double> fpga_delays_ns,
                                         double duration_ns, uint64_t seed, unsigned workers = 0);

/// Width of the sweep region where at least `min_fraction` of gated
/// heralded photons are on the plateau: points above threshold times the
/// sweep step.
double plateau_width_from_sweep(std::span<const SweepPoint> sweep, double min_fraction);

/// Uniformly sampled waveform.
struct Waveform {
    std::vector<double> time_ns;
    std::vector<double> value;

    void write_csv(std::ostream &out, const std::string &value_column) const;
};

/// phase_at sampled on [t0, t1] every dt with the gate opened at
/// drive.offset_ns.
Waveform sample_drive(const EomDrive &drive, double t0_ns, double t1_ns, double dt_ns);

/// 10% -> 90% time of the first rising edge, linearly interpolated between
/// samples. Throws std::invalid_argument on flat or non-monotone edges.
double measure_rise_time(const Waveform &trace);
/// 90% -> 10% time of the last falling edge.
double measure_fall_time(const Waveform &trace);
/// Samples within `tol` of the maximum, times the sample step.
double measure_plateau_width(const Waveform &trace, double tol = 1e-12);

}  // namespace tbssim

#endif
