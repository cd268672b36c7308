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

#include "tbssim/control_timing.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "tbssim/csv.h"
#include "tbssim/random.h"
#include "tbssim/tbs.h"

namespace tbssim {

namespace {

constexpr double kSpeedOfLightMPerNs = 0.299792458;

void require_positive(double x, const char *what) {
    if (!(x > 0) || !std::isfinite(x)) {
        throw std::invalid_argument(std::string(what) + " must be positive");
    }
}

void require_non_negative(double x, const char *what) {
    if (!(x >= 0) || !std::isfinite(x)) {
        throw std::invalid_argument(std::string(what) + " must be non-negative");
    }
}

double solve_ramp_order() {
    // 10-90 width of I_u(k, k) shrinks monotonically with k.
    auto width = [](double k) {
        return boost::math::ibeta_inv(k, k, 0.9) - boost::math::ibeta_inv(k, k, 0.1);
    };
    double lo = 1;
    double hi = 16;
    for (int i = 0; i < 200; i++) {
        double mid = 0.5 * (lo + hi);
        if (width(mid) > 0.5) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

void EomDrive::validate() const {
    require_positive(on_time_ns, "EomDrive: on_time");
    require_positive(rise_time_ns, "EomDrive: rise_time");
    require_positive(fall_time_ns, "EomDrive: fall_time");
    require_non_negative(offset_ns, "EomDrive: offset");
    if (!std::isfinite(target_phase_rad)) {
        throw std::invalid_argument("EomDrive: target phase must be finite");
    }
    if (on_time_ns < rise_time_ns + fall_time_ns) {
        std::ostringstream msg;
        msg << "EomDrive: on_time " << on_time_ns << " ns is shorter than rise " << rise_time_ns << " ns + fall "
            << fall_time_ns << " ns";
        throw std::invalid_argument(msg.str());
    }
}

double ramp_shape_order() {
    static const double k = solve_ramp_order();
    return k;
}

double ramp_shape(double u) {
    if (u <= 0) {
        return 0;
    }
    if (u >= 1) {
        return 1;
    }
    double k = ramp_shape_order();
    return boost::math::ibeta(k, k, u);
}

double phase_at(const EomDrive &drive, double gate_open_ns, double t_ns) {
    double dt = t_ns - gate_open_ns;
    if (dt <= 0) {
        return 0;
    }
    double rise_span = 2 * drive.rise_time_ns;
    if (dt < rise_span) {
        return drive.target_phase_rad * ramp_shape(dt / rise_span);
    }
    double plateau_end = rise_span + drive.plateau_ns();
    if (dt <= plateau_end) {
        return drive.target_phase_rad;
    }
    double fall_span = 2 * drive.fall_time_ns;
    if (dt < plateau_end + fall_span) {
        return drive.target_phase_rad * ramp_shape(1 - (dt - plateau_end) / fall_span);
    }
    return 0;
}

void ChainDelays::validate() const {
    require_non_negative(fiber_length_m, "ChainDelays: fiber length");
    require_positive(fiber_group_index, "ChainDelays: fiber group index");
    require_non_negative(detector_latency_ns, "ChainDelays: detector latency");
    require_non_negative(cable_delay_ns, "ChainDelays: cable delay");
    if (fpga_delay_ns) {
        require_non_negative(*fpga_delay_ns, "ChainDelays: fpga delay");
    }
}

double ChainDelays::fiber_delay_ns() const {
    return fiber_length_m * fiber_group_index / kSpeedOfLightMPerNs;
}

void TimingConfig::validate() const {
    require_positive(pump_period_ns, "TimingConfig: pump period");
    if (!(pair_probability >= 0 && pair_probability <= 1)) {
        throw std::invalid_argument("TimingConfig: pair probability must lie in [0, 1]");
    }
    require_positive(max_gate_rate_mhz, "TimingConfig: maximum gate rate");
    trigger_detector.validate();
    detector_f.validate();
    detector_e.validate();
    delays.validate();
    drive.validate();
    if (fpga_delay_ns() < 0) {
        throw std::invalid_argument("TimingConfig: chain delays leave no room for a non-negative fpga delay");
    }
}

double centered_fpga_delay(const TimingConfig &config) {
    const auto &d = config.delays;
    return d.fiber_delay_ns() - d.detector_latency_ns - d.cable_delay_ns - config.drive.plateau_center_ns();
}

double TimingConfig::fpga_delay_ns() const {
    return delays.fpga_delay_ns ? *delays.fpga_delay_ns : centered_fpga_delay(*this);
}

std::string event_kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::pump_pulse:
            return "pump_pulse";
        case EventKind::pair_created:
            return "pair_created";
        case EventKind::trigger_click:
            return "trigger_click";
        case EventKind::gate_open:
            return "gate_open";
        case EventKind::gate_close:
            return "gate_close";
        case EventKind::photon2_at_tbs:
            return "photon2_at_tbs";
        case EventKind::detector_click:
            return "detector_click";
    }
    return "unknown";
}

std::string TimelineEvent::payload() const {
    std::string out = "pulse=" + std::to_string(pulse);
    if (kind == EventKind::pump_pulse) {
        return out;
    }
    out += ";pair=" + std::to_string(pair);
    switch (kind) {
        case EventKind::trigger_click:
            out += accepted ? ";gate=accepted" : ";gate=rejected";
            break;
        case EventKind::photon2_at_tbs:
            out += ";phase_rad=" + format_double(phase_rad);
            break;
        case EventKind::detector_click:
            out += ";detector=D" + std::to_string(detector) + ";phase_rad=" + format_double(phase_rad);
            break;
        default:
            break;
    }
    return out;
}

std::size_t EventTimeline::count(EventKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [kind](const TimelineEvent &e) { return e.kind == kind; }));
}

void EventTimeline::write_csv(std::ostream &out) const {
    out << "time_ns,kind,payload\n";
    for (const auto &e : events) {
        out << format_double(e.time_ns) << ',' << event_kind_name(e.kind) << ',' << e.payload() << '\n';
    }
}

RateLimitResult rate_limit(std::span<const double> requests, double min_spacing_ns) {
    if (!std::is_sorted(requests.begin(), requests.end())) {
        throw std::invalid_argument("rate_limit: request times must be sorted");
    }
    RateLimitResult out;
    for (double t : requests) {
        if (out.accepted.empty() || t - out.accepted.back() >= min_spacing_ns - 1e-9) {
            out.accepted.push_back(t);
            out.accepted_mask.push_back(true);
        } else {
            std::ostringstream reason;
            reason << "within " << format_double(t - out.accepted.back()) << " ns of gate at "
                   << format_double(out.accepted.back()) << " ns; minimum spacing " << format_double(min_spacing_ns)
                   << " ns";
            out.rejected.push_back({t, reason.str()});
            out.accepted_mask.push_back(false);
        }
    }
    return out;
}

EventTimeline run_timeline(const TimingConfig &config, double duration_ns, uint64_t seed) {
    require_positive(duration_ns, "run_timeline: duration");
    config.validate();

    Rng rng(derive_seed(seed, 0x7469'6d65));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double period = config.pump_period_ns;
    const auto num_pulses = static_cast<int64_t>(std::ceil(duration_ns / period));
    const double fpga = config.fpga_delay_ns();
    const double fiber = config.delays.fiber_delay_ns();

    std::vector<TimelineEvent> events;
    if (config.record_pump_pulses) {
        events.reserve(static_cast<std::size_t>(num_pulses));
        for (int64_t k = 0; k < num_pulses; k++) {
            TimelineEvent e;
            e.time_ns = static_cast<double>(k) * period;
            e.kind = EventKind::pump_pulse;
            e.pulse = k;
            events.push_back(e);
        }
    }

    struct Pair {
        int64_t pulse;
        double created_ns;
        bool triggered;
    };
    std::vector<Pair> pairs;
    if (config.pair_probability > 0) {
        std::geometric_distribution<int64_t> gap(config.pair_probability);
        for (int64_t k = gap(rng); k < num_pulses; k += 1 + gap(rng)) {
            pairs.push_back({k, static_cast<double>(k) * period, false});
        }
    }
    for (auto &p : pairs) {
        p.triggered = unit(rng) < config.trigger_detector.efficiency;
    }

    // Gate requests from heralding clicks and trigger dark counts, in time order.
    struct Request {
        double time_ns;
        double click_ns;
        int64_t pair;
        int64_t pulse;
    };
    std::vector<Request> requests;
    const double request_lag = fpga + config.delays.cable_delay_ns;
    const double latency = config.delays.detector_latency_ns;
    for (std::size_t i = 0; i < pairs.size(); i++) {
        if (pairs[i].triggered) {
            double click = pairs[i].created_ns + latency;
            requests.push_back({click + request_lag, click, static_cast<int64_t>(i), pairs[i].pulse});
        }
    }
    if (config.trigger_detector.dark_count_rate_hz > 0) {
        std::exponential_distribution<double> dark_gap(config.trigger_detector.dark_count_rate_hz * 1e-9);
        for (double t = dark_gap(rng); t < duration_ns; t += dark_gap(rng)) {
            double click = t + latency;
            requests.push_back({click + request_lag, click, -1, -1});
        }
    }
    std::stable_sort(requests.begin(), requests.end(),
                     [](const Request &x, const Request &y) { return x.time_ns < y.time_ns; });

    std::vector<double> request_times;
    request_times.reserve(requests.size());
    for (const auto &r : requests) {
        request_times.push_back(r.time_ns);
    }
    RateLimitResult limited = rate_limit(request_times, config.min_gate_spacing_ns());

    // Accepted gates, sorted by opening time, with the pair that opened them.
    std::vector<std::pair<double, int64_t>> gates;
    for (std::size_t i = 0; i < requests.size(); i++) {
        const auto &r = requests[i];
        bool accepted = limited.accepted_mask[i];
        if (accepted) {
            gates.push_back({r.time_ns, r.pair});
        }
        TimelineEvent click;
        click.time_ns = r.click_ns;
        click.kind = EventKind::trigger_click;
        click.pulse = r.pulse;
        click.pair = r.pair;
        click.accepted = accepted;
        events.push_back(click);
        if (accepted) {
            TimelineEvent open;
            open.time_ns = r.time_ns;
            open.kind = EventKind::gate_open;
            open.pulse = r.pulse;
            open.pair = r.pair;
            events.push_back(open);
            TimelineEvent close = open;
            close.time_ns = r.time_ns + config.drive.total_span_ns();
            close.kind = EventKind::gate_close;
            events.push_back(close);
        }
    }

    auto experienced = [&](double t) {
        auto it = std::upper_bound(gates.begin(), gates.end(), t,
                                   [](double x, const std::pair<double, int64_t> &g) { return x < g.first; });
        if (it == gates.begin()) {
            return 0.0;
        }
        return phase_at(config.drive, std::prev(it)->first, t);
    };

    for (std::size_t i = 0; i < pairs.size(); i++) {
        const auto &p = pairs[i];
        TimelineEvent created;
        created.time_ns = p.created_ns;
        created.kind = EventKind::pair_created;
        created.pulse = p.pulse;
        created.pair = static_cast<int64_t>(i);
        events.push_back(created);

        double arrival = p.created_ns + fiber;
        double phase = experienced(arrival);
        TimelineEvent at_tbs = created;
        at_tbs.time_ns = arrival;
        at_tbs.kind = EventKind::photon2_at_tbs;
        at_tbs.phase_rad = phase;
        events.push_back(at_tbs);

        double t = transmissivity(phase);
        bool to_f = unit(rng) < t;
        const DetectorModel &det = to_f ? config.detector_f : config.detector_e;
        if (unit(rng) < det.efficiency) {
            TimelineEvent click = at_tbs;
            click.kind = EventKind::detector_click;
            click.detector = to_f ? 1 : 2;
            events.push_back(click);
        }
    }

    std::stable_sort(events.begin(), events.end(), [](const TimelineEvent &x, const TimelineEvent &y) {
        if (x.time_ns != y.time_ns) {
            return x.time_ns < y.time_ns;
        }
        return static_cast<int>(x.kind) < static_cast<int>(y.kind);
    });
    return {std::move(events)};
}

double AlignmentReport::on_plateau_fraction() const {
    return gated_heralded_count == 0 ? 0.0
                                     : static_cast<double>(on_plateau_count) / static_cast<double>(gated_heralded_count);
}

double AlignmentReport::on_plateau_fraction_all() const {
    return heralded_count == 0 ? 0.0 : static_cast<double>(on_plateau_count) / static_cast<double>(heralded_count);
}

double AlignmentReport::foreign_fraction() const {
    return switched_photons == 0 ? 0.0
                                 : static_cast<double>(switched_by_foreign_gate) / static_cast<double>(switched_photons);
}

AlignmentReport gate_alignment(const EventTimeline &timeline, const EomDrive &drive) {
    std::vector<std::pair<double, int64_t>> gates;
    std::map<int64_t, double> own_gate;
    std::set<int64_t> triggered;
    for (const auto &e : timeline.events) {
        if (e.kind == EventKind::gate_open) {
            gates.push_back({e.time_ns, e.pair});
            if (e.pair >= 0) {
                own_gate[e.pair] = e.time_ns;
            }
        } else if (e.kind == EventKind::trigger_click && e.pair >= 0) {
            triggered.insert(e.pair);
        }
    }

    const double tol = 1e-12 * std::max(1.0, std::abs(drive.target_phase_rad));
    AlignmentReport report;
    for (const auto &e : timeline.events) {
        if (e.kind != EventKind::photon2_at_tbs) {
            continue;
        }
        auto it = std::upper_bound(gates.begin(), gates.end(), e.time_ns,
                                   [](double x, const std::pair<double, int64_t> &g) { return x < g.first; });
        double phase = 0;
        int64_t gate_pair = -2;
        if (it != gates.begin()) {
            phase = phase_at(drive, std::prev(it)->first, e.time_ns);
            gate_pair = std::prev(it)->second;
        }
        bool switched = phase != 0;
        bool foreign = switched && gate_pair != e.pair;
        if (switched) {
            report.switched_photons++;
            report.switched_by_foreign_gate += foreign;
        }
        if (!triggered.count(e.pair)) {
            continue;
        }

        PhotonAlignment a;
        a.pair = e.pair;
        a.arrival_ns = e.time_ns;
        auto own = own_gate.find(e.pair);
        if (own != own_gate.end()) {
            a.own_gate_open_ns = own->second;
        }
        a.experienced_phase_rad = phase;
        a.on_plateau = std::abs(phase - drive.target_phase_rad) <= tol && switched;
        a.switched_by_foreign_gate = foreign;
        report.heralded_count++;
        if (a.own_gate_open_ns) {
            report.gated_heralded_count++;
            report.on_plateau_count += a.on_plateau;
        }
        report.heralded.push_back(a);
    }
    return report;
}

int foreign_slots_in_gate(const TimingConfig &config) {
    // Arrival of pulse j's photon relative to the gate opened for pulse 0.
    double lag = config.delays.fiber_delay_ns() - config.delays.detector_latency_ns - config.fpga_delay_ns() -
                 config.delays.cable_delay_ns;
    double span = config.drive.total_span_ns();
    int slots = 0;
    auto reach = static_cast<int>(std::ceil(span / config.pump_period_ns)) + 1;
    for (int j = -reach; j <= reach; j++) {
        double t = lag + j * config.pump_period_ns;
        if (j != 0 && t > 0 && t < span) {
            slots++;
        }
    }
    return slots;
}

std::vector<SweepPoint> fpga_delay_sweep(TimingConfig config, std::span<const double> fpga_delays_ns,
                                         double duration_ns, uint64_t seed, unsigned workers) {
    config.record_pump_pulses = false;
    std::vector<SweepPoint> out(fpga_delays_ns.size());
    parallel_for(out.size(), workers, [&](std::size_t i) {
        TimingConfig c = config;
        c.delays.fpga_delay_ns = fpga_delays_ns[i];
        AlignmentReport r = gate_alignment(run_timeline(c, duration_ns, seed), c.drive);
        out[i] = {fpga_delays_ns[i], r.on_plateau_fraction(), r.gated_heralded_count};
    });
    return out;
}

double plateau_width_from_sweep(std::span<const SweepPoint> sweep, double min_fraction) {
    if (sweep.size() < 2) {
        throw std::invalid_argument("plateau_width_from_sweep: need at least two sweep points");
    }
    double step = sweep[1].fpga_delay_ns - sweep[0].fpga_delay_ns;
    auto n = std::count_if(sweep.begin(), sweep.end(), [&](const SweepPoint &p) {
        return p.gated_heralded > 0 && p.on_plateau_fraction >= min_fraction;
    });
    return static_cast<double>(n) * std::abs(step);
}

void Waveform::write_csv(std::ostream &out, const std::string &value_column) const {
    out << "time_ns," << value_column << '\n';
    for (std::size_t i = 0; i < time_ns.size(); i++) {
        out << format_double(time_ns[i]) << ',' << format_double(value[i]) << '\n';
    }
}

Waveform sample_drive(const EomDrive &drive, double t0_ns, double t1_ns, double dt_ns) {
    require_positive(dt_ns, "sample_drive: sample step");
    if (!(t1_ns > t0_ns)) {
        throw std::invalid_argument("sample_drive: empty time range");
    }
    drive.validate();
    auto n = static_cast<std::size_t>(std::llround((t1_ns - t0_ns) / dt_ns));
    Waveform w;
    w.time_ns.reserve(n + 1);
    w.value.reserve(n + 1);
    for (std::size_t i = 0; i <= n; i++) {
        double t = t0_ns + static_cast<double>(i) * dt_ns;
        w.time_ns.push_back(t);
        w.value.push_back(phase_at(drive, drive.offset_ns, t));
    }
    return w;
}

namespace {

/// 10-90% time of the first rising edge of (t, v); t strictly increasing.
double rising_edge(const std::vector<double> &t, const std::vector<double> &v) {
    if (t.size() != v.size() || t.size() < 2) {
        throw std::invalid_argument("measure_rise_time: trace needs at least two samples");
    }
    double base = v.front();
    double top = *std::max_element(v.begin(), v.end());
    double height = top - base;
    if (!(height > 0)) {
        throw std::invalid_argument("measure_rise_time: trace is flat");
    }
    double l10 = base + 0.1 * height;
    double l90 = base + 0.9 * height;

    auto first_at_or_above = [&](double level) {
        for (std::size_t i = 0; i < v.size(); i++) {
            if (v[i] >= level) {
                return i;
            }
        }
        return v.size();
    };
    std::size_t i10 = first_at_or_above(l10);
    std::size_t i90 = first_at_or_above(l90);
    for (std::size_t j = (i10 == 0 ? 0 : i10 - 1); j < i90; j++) {
        if (v[j + 1] < v[j] - 1e-12 * height) {
            throw std::invalid_argument("measure_rise_time: edge is not monotone");
        }
    }
    auto crossing = [&](std::size_t i, double level) {
        if (i == 0) {
            return t[0];
        }
        double f = (level - v[i - 1]) / (v[i] - v[i - 1]);
        return t[i - 1] + f * (t[i] - t[i - 1]);
    };
    return crossing(i90, l90) - crossing(i10, l10);
}

}  // namespace

double measure_rise_time(const Waveform &trace) {
    return rising_edge(trace.time_ns, trace.value);
}

double measure_fall_time(const Waveform &trace) {
    std::vector<double> t(trace.time_ns.rbegin(), trace.time_ns.rend());
    std::vector<double> v(trace.value.rbegin(), trace.value.rend());
    for (double &x : t) {
        x = -x;
    }
    return rising_edge(t, v);
}

double measure_plateau_width(const Waveform &trace, double tol) {
    if (trace.value.size() < 2) {
        throw std::invalid_argument("measure_plateau_width: trace needs at least two samples");
    }
    double top = *std::max_element(trace.value.begin(), trace.value.end());
    auto n = std::count_if(trace.value.begin(), trace.value.end(),
                           [&](double x) { return std::abs(x - top) <= tol * std::max(1.0, std::abs(top)); });
    double dt = trace.time_ns[1] - trace.time_ns[0];
    return static_cast<double>(n) * dt;
}

}  // namespace tbssim
