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

#include "tbssim/two_photon.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "tbssim/csv.h"
#include "tbssim/random.h"
#include "tbssim/tbs.h"

namespace tbssim {

namespace {

constexpr double kSpeedOfLightNmPerNs = 299792458.0;  // 1 m/s = 1 nm/ns

}  // namespace

void Wavepacket::validate() const {
    if (!(center_wavelength_nm > 0)) {
        throw std::invalid_argument("Wavepacket: centre wavelength must be positive");
    }
    if (!(bandwidth_fwhm_nm > 0)) {
        throw std::invalid_argument("Wavepacket: bandwidth must be positive");
    }
}

double Wavepacket::sigma_omega() const {
    validate();
    double fwhm_hz_per_ns = kSpeedOfLightNmPerNs * bandwidth_fwhm_nm / (center_wavelength_nm * center_wavelength_nm);
    double sigma_nu = fwhm_hz_per_ns / (2 * std::sqrt(2 * std::numbers::ln2));
    return 2 * std::numbers::pi * sigma_nu;
}

double Wavepacket::coherence_time_ns() const {
    return 1 / sigma_omega();
}

double overlap(const Wavepacket &w1, const Wavepacket &w2, double delay_ns) {
    double s1 = w1.sigma_omega();
    double s2 = w2.sigma_omega();
    double sum2 = s1 * s1 + s2 * s2;
    double tau = delay_ns + w2.arrival_offset_ns - w1.arrival_offset_ns;
    double d_omega = 2 * std::numbers::pi * kSpeedOfLightNmPerNs *
                     (1 / w1.center_wavelength_nm - 1 / w2.center_wavelength_nm);
    double width = std::sqrt(2 * s1 * s2 / sum2);
    return width * std::exp(-d_omega * d_omega / (4 * sum2)) * std::exp(-tau * tau * s1 * s1 * s2 * s2 / sum2);
}

double hom_coincidence_prob(double phi, double gamma) {
    if (!(gamma >= 0 && gamma <= 1)) {
        throw std::invalid_argument("hom_coincidence_prob: gamma must lie in [0, 1]");
    }
    if (!std::isfinite(phi)) {
        throw std::invalid_argument("hom_coincidence_prob: phase must be finite");
    }
    double t = transmissivity(phi);
    double r = reflectivity(phi);
    return t * t + r * r - 2 * t * r * gamma * gamma;
}

double hom_dip_visibility(double phi, double gamma) {
    double t = transmissivity(phi);
    double r = reflectivity(phi);
    if (t * r <= 1e-15) {
        throw std::domain_error("hom_dip_visibility: splitter is fully transmitting or reflecting, no dip exists");
    }
    double far = hom_coincidence_prob(phi, 0);
    double zero = hom_coincidence_prob(phi, gamma);
    return (far - zero) / far;
}

std::vector<HomPoint> hom_delay_scan(const HomScanConfig &config) {
    if (config.delays_ns.empty()) {
        throw std::invalid_argument("hom_delay_scan: empty delay list");
    }
    if (config.shots_per_point < 1) {
        throw std::invalid_argument("hom_delay_scan: shots_per_point must be at least 1");
    }
    if (!(config.gamma0 >= 0 && config.gamma0 <= 1)) {
        throw std::invalid_argument("hom_delay_scan: gamma0 must lie in [0, 1]");
    }
    if (!(config.efficiency_e >= 0 && config.efficiency_e <= 1 && config.efficiency_f >= 0 &&
          config.efficiency_f <= 1)) {
        throw std::invalid_argument("hom_delay_scan: efficiencies must lie in [0, 1]");
    }
    config.photon1.validate();
    config.photon2.validate();

    std::vector<HomPoint> points(config.delays_ns.size());
    parallel_for(points.size(), config.workers, [&](std::size_t k) {
        double delay = config.delays_ns[k];
        double gamma = config.gamma0 * overlap(config.photon1, config.photon2, delay);
        double p = hom_coincidence_prob(config.phi, gamma) * config.efficiency_e * config.efficiency_f;
        Rng rng = make_rng(config.seed, k);
        std::bernoulli_distribution click(std::clamp(p, 0.0, 1.0));
        uint64_t n = 0;
        for (uint64_t s = 0; s < config.shots_per_point; s++) {
            n += click(rng);
        }
        points[k] = {delay, p, n, config.shots_per_point, std::sqrt(static_cast<double>(n))};
    });
    return points;
}

void write_hom_csv(std::ostream &out, std::span<const HomPoint> points) {
    out << "delay_ns,coincidences,expected_prob,sigma\n";
    for (const auto &p : points) {
        out << format_double(p.delay_ns) << ',' << p.coincidences << ',' << format_double(p.expected_prob) << ','
            << format_double(p.sigma) << '\n';
    }
}

DipAnalysis analyze_dip(std::span<const HomPoint> points) {
    if (points.size() < 3) {
        throw std::invalid_argument("analyze_dip: at least 3 points are required");
    }
    double first = static_cast<double>(points.front().coincidences);
    double last = static_cast<double>(points.back().coincidences);
    double baseline = 0.5 * (first + last);
    double minimum = static_cast<double>(
        std::min_element(points.begin(), points.end(),
                         [](const HomPoint &x, const HomPoint &y) { return x.coincidences < y.coincidences; })
            ->coincidences);

    DipAnalysis a{};
    a.baseline = baseline;
    a.minimum = minimum;
    if (baseline > 0) {
        a.visibility = (baseline - minimum) / baseline;
        double sigma_base = std::sqrt(first + last) / 2;
        double sigma_min = std::sqrt(minimum);
        a.visibility_sigma = std::hypot(sigma_min / baseline, minimum * sigma_base / (baseline * baseline));
    }

    double mean = 0;
    for (const auto &p : points) {
        mean += static_cast<double>(p.coincidences);
    }
    mean /= static_cast<double>(points.size());
    double chi2 = 0;
    if (mean > 0) {
        for (const auto &p : points) {
            double d = static_cast<double>(p.coincidences) - mean;
            chi2 += d * d / mean;
        }
    }
    boost::math::chi_squared dist(static_cast<double>(points.size() - 1));
    a.chi2_flat = chi2;
    a.chi2_threshold = boost::math::quantile(dist, 0.999);
    a.dip_detected = chi2 > a.chi2_threshold && minimum < baseline;
    return a;
}

}  // namespace tbssim
