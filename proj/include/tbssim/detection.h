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

#ifndef TBSSIM_DETECTION_H
#define TBSSIM_DETECTION_H

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tbssim/random.h"

namespace tbssim {

/// Avalanche photodiode model.
struct DetectorModel {
    double efficiency = 1;
    double dark_count_rate_hz = 0;
    double dead_time_ns = 0;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
    /// Probability of at least one dark count in a window of the given length.
    double dark_click_probability(double window_ns) const;
};

struct ClickSet {
    /// Detector fired (photon or dark count).
    std::vector<bool> clicked;
    /// Detector fired because of the photon.
    std::vector<bool> photon;

    bool any() const;
};

/// Samples one shot. output_probs[k] is the probability that the photon
/// reaches detector k; the outcomes are mutually exclusive, so their sum
/// must not exceed 1 (+1e-9). Each detector then applies its efficiency and
/// an independent dark-count draw over `window_ns`.
ClickSet sample_clicks(std::span<const double> output_probs, std::span<const DetectorModel> models, double window_ns,
                       Rng &rng);

/// Counts coincidences between two sorted timestamp streams. Two clicks
/// coincide when |t1 - t2| <= window_ns / 2, i.e. `window_ns` is the full
/// width of the coincidence interval. Each click is used at most once and
/// matching is greedy earliest-first.
uint64_t coincide(std::span<const double> clicks_a, std::span<const double> clicks_b, double window_ns);

/// Removes clicks that fall inside the dead time after a registered click
/// (non-paralyzable detector).
std::vector<double> apply_dead_time(std::span<const double> clicks, double dead_time_ns);

/// Tallies for one scan setting.
struct CountRow {
    int setting_id = 0;
    double phi_rad = 0;
    uint64_t singles_d1 = 0;
    uint64_t singles_d2 = 0;
    uint64_t singles_d3 = 0;
    uint64_t cc_13 = 0;
    uint64_t cc_23 = 0;
    uint64_t shots = 0;

    /// Poisson sigma of a tally.
    static double sigma(uint64_t n);
    /// Coincidences per shot, heralded by D3.
    double heralded_rate() const;
};

struct CountTable {
    std::vector<CountRow> rows;

    /// Checks coincidences <= min(singles of the pair).
    bool consistent() const;
    void write_csv(std::ostream &out) const;
};

struct TREstimate {
    double transmissivity;
    double reflectivity;
    /// Binomial standard deviation, shared by T and R.
    double sigma;
};

/// T = C13 / (C13 + C23). Throws std::invalid_argument on zero totals.
TREstimate estimate_T_R(const CountRow &row);

/// Detectors and losses of the heralded single-photon measurement: D3
/// sees the trigger photon, D1 watches output f, D2 watches output e.
struct HeraldedSetup {
    DetectorModel d1;
    DetectorModel d2;
    DetectorModel d3;
    /// 1 - insertion loss of the splitter.
    double insertion_survival = 1;
    double window_ns = 3;

    void validate() const;
};

/// Simulates one created pair and adds its clicks to `row` (shots += 1).
/// prob_f + prob_e is the photon-2 routing probability before losses.
void record_heralded_shot(double prob_f, double prob_e, const HeraldedSetup &setup, Rng &rng, CountRow &row);

}  // namespace tbssim

#endif
