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

#include "tbssim/detection.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "tbssim/csv.h"

namespace tbssim {

void DetectorModel::validate() const {
    if (!(efficiency >= 0 && efficiency <= 1)) {
        throw std::invalid_argument("DetectorModel: efficiency must lie in [0, 1]");
    }
    if (!(dark_count_rate_hz >= 0) || !std::isfinite(dark_count_rate_hz)) {
        throw std::invalid_argument("DetectorModel: dark count rate must be finite and non-negative");
    }
    if (!(dead_time_ns >= 0) || !std::isfinite(dead_time_ns)) {
        throw std::invalid_argument("DetectorModel: dead time must be finite and non-negative");
    }
}

double DetectorModel::dark_click_probability(double window_ns) const {
    return -std::expm1(-dark_count_rate_hz * window_ns * 1e-9);
}

bool ClickSet::any() const {
    return std::any_of(clicked.begin(), clicked.end(), [](bool b) { return b; });
}

ClickSet sample_clicks(std::span<const double> output_probs, std::span<const DetectorModel> models, double window_ns,
                       Rng &rng) {
    if (output_probs.size() != models.size()) {
        throw std::invalid_argument("sample_clicks: one detector model per output is required");
    }
    double total = 0;
    for (double p : output_probs) {
        if (!(p >= 0 && p <= 1)) {
            throw std::invalid_argument("sample_clicks: probabilities must lie in [0, 1]");
        }
        total += p;
    }
    if (total > 1 + 1e-9) {
        throw std::invalid_argument("sample_clicks: exclusive outcome probabilities sum above 1");
    }

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ClickSet out;
    out.clicked.assign(models.size(), false);
    out.photon.assign(models.size(), false);

    double u = unit(rng);
    double acc = 0;
    for (std::size_t k = 0; k < output_probs.size(); k++) {
        acc += output_probs[k];
        if (u < acc) {
            if (unit(rng) < models[k].efficiency) {
                out.photon[k] = true;
                out.clicked[k] = true;
            }
            break;
        }
    }
    for (std::size_t k = 0; k < models.size(); k++) {
        if (models[k].dark_count_rate_hz > 0 && unit(rng) < models[k].dark_click_probability(window_ns)) {
            out.clicked[k] = true;
        }
    }
    return out;
}

uint64_t coincide(std::span<const double> clicks_a, std::span<const double> clicks_b, double window_ns) {
    if (!(window_ns > 0)) {
        throw std::invalid_argument("coincide: window must be positive");
    }
    if (!std::is_sorted(clicks_a.begin(), clicks_a.end()) || !std::is_sorted(clicks_b.begin(), clicks_b.end())) {
        throw std::invalid_argument("coincide: click streams must be sorted");
    }
    double half = window_ns / 2;
    uint64_t n = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < clicks_a.size() && j < clicks_b.size()) {
        double dt = clicks_a[i] - clicks_b[j];
        if (std::abs(dt) <= half) {
            n++;
            i++;
            j++;
        } else if (dt < 0) {
            i++;
        } else {
            j++;
        }
    }
    return n;
}

std::vector<double> apply_dead_time(std::span<const double> clicks, double dead_time_ns) {
    std::vector<double> out;
    for (double t : clicks) {
        if (out.empty() || t - out.back() >= dead_time_ns) {
            out.push_back(t);
        }
    }
    return out;
}

double CountRow::sigma(uint64_t n) {
    return std::sqrt(static_cast<double>(n));
}

double CountRow::heralded_rate() const {
    if (shots == 0) {
        return 0;
    }
    return static_cast<double>(cc_13 + cc_23) / static_cast<double>(shots);
}

bool CountTable::consistent() const {
    for (const auto &r : rows) {
        if (r.cc_13 > std::min(r.singles_d1, r.singles_d3) || r.cc_23 > std::min(r.singles_d2, r.singles_d3)) {
            return false;
        }
        if (r.singles_d1 > r.shots || r.singles_d2 > r.shots || r.singles_d3 > r.shots) {
            return false;
        }
    }
    return true;
}

void CountTable::write_csv(std::ostream &out) const {
    out << "setting_id,phi_rad,singles_d1,singles_d2,singles_d3,cc_13,cc_23,shots\n";
    for (const auto &r : rows) {
        out << r.setting_id << ',' << format_double(r.phi_rad) << ',' << r.singles_d1 << ',' << r.singles_d2 << ','
            << r.singles_d3 << ',' << r.cc_13 << ',' << r.cc_23 << ',' << r.shots << '\n';
    }
}

TREstimate estimate_T_R(const CountRow &row) {
    uint64_t total = row.cc_13 + row.cc_23;
    if (total == 0) {
        throw std::invalid_argument("estimate_T_R: no coincidences recorded");
    }
    double n = static_cast<double>(total);
    double t = static_cast<double>(row.cc_13) / n;
    return {t, 1 - t, std::sqrt(t * (1 - t) / n)};
}

void HeraldedSetup::validate() const {
    d1.validate();
    d2.validate();
    d3.validate();
    if (!(insertion_survival >= 0 && insertion_survival <= 1)) {
        throw std::invalid_argument("HeraldedSetup: insertion survival must lie in [0, 1]");
    }
    if (!(window_ns > 0)) {
        throw std::invalid_argument("HeraldedSetup: coincidence window must be positive");
    }
}

void record_heralded_shot(double prob_f, double prob_e, const HeraldedSetup &setup, Rng &rng, CountRow &row) {
    const double probs[] = {prob_f * setup.insertion_survival, prob_e * setup.insertion_survival, 0.0};
    const DetectorModel models[] = {setup.d1, setup.d2, setup.d3};
    ClickSet photon2 = sample_clicks(std::span<const double>(probs, 2), std::span<const DetectorModel>(models, 2),
                                     setup.window_ns, rng);
    const double trigger_prob[] = {1.0};
    ClickSet photon1 = sample_clicks(trigger_prob, std::span<const DetectorModel>(models + 2, 1), setup.window_ns, rng);

    bool c1 = photon2.clicked[0];
    bool c2 = photon2.clicked[1];
    bool c3 = photon1.clicked[0];
    row.shots++;
    row.singles_d1 += c1;
    row.singles_d2 += c2;
    row.singles_d3 += c3;
    row.cc_13 += c1 && c3;
    row.cc_23 += c2 && c3;
}

}  // namespace tbssim
