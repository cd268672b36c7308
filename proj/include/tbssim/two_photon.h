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

#ifndef TBSSIM_TWO_PHOTON_H
#define TBSSIM_TWO_PHOTON_H

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace tbssim {

/// Filtered single-photon wavepacket with a Gaussian power spectrum.
struct Wavepacket {
    double center_wavelength_nm = 808;
    double bandwidth_fwhm_nm = 3;
    double arrival_offset_ns = 0;

    void validate() const;
    /// Angular-frequency standard deviation of the power spectrum, rad/ns.
    double sigma_omega() const;
    /// 1 / sigma_omega: the delay at which the overlap drops to exp(-1/2).
    double coherence_time_ns() const;
};

/// |<psi_1|psi_2>| for the two packets when photon 2 is delayed by
/// `delay_ns` relative to photon 1 (on top of their arrival offsets).
/// Identical packets give exp(-delay^2 / (2 tau^2)) with tau the coherence
/// time; centre-wavelength and bandwidth mismatch reduce the peak.
double overlap(const Wavepacket &w1, const Wavepacket &w2, double delay_ns);

/// Coincidence probability with one photon in each input of a splitter
/// set to phase phi: T^2 + R^2 - 2 T R gamma^2.
double hom_coincidence_prob(double phi, double gamma);

/// (P_far - P_zero) / P_far = 2 T R gamma^2 / (T^2 + R^2). Throws
/// std::domain_error when T R = 0 (phi = 0 or pi): there is no dip to measure.
double hom_dip_visibility(double phi, double gamma);

struct HomPoint {
    double delay_ns = 0;
    double expected_prob = 0;
    uint64_t coincidences = 0;
    uint64_t shots = 0;
    double sigma = 0;
};

struct HomScanConfig {
    std::vector<double> delays_ns;
    double phi = 0;
    Wavepacket photon1;
    Wavepacket photon2;
    /// Peak indistinguishability left after timing is matched; multiplies
    /// the spectral overlap.
    double gamma0 = 1;
    uint64_t shots_per_point = 100000;
    double efficiency_e = 1;
    double efficiency_f = 1;
    uint64_t seed = 0;
    unsigned workers = 0;
};

/// Monte Carlo coincidence tallies over the delay list; point k uses the
/// generator keyed by (seed, k).
std::vector<HomPoint> hom_delay_scan(const HomScanConfig &config);

void write_hom_csv(std::ostream &out, std::span<const HomPoint> points);

struct DipAnalysis {
    /// Mean counts of the two outermost delays.
    double baseline;
    double minimum;
    double visibility;
    double visibility_sigma;
    /// Chi-square of the counts against a flat Poisson model.
    double chi2_flat;
    /// 99.9% quantile of chi-square with n-1 degrees of freedom.
    double chi2_threshold;
    bool dip_detected;
};

DipAnalysis analyze_dip(std::span<const HomPoint> points);

}  // namespace tbssim

#endif
