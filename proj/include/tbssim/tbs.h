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

#ifndef TBSSIM_TBS_H
#define TBSSIM_TBS_H

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "tbssim/detection.h"
#include "tbssim/quantum_core.h"

namespace tbssim {

/// Output amplitudes of the tunable splitter for an input on path a.
struct TbsOutput {
    Complex e_plus;
    Complex e_minus;
    Complex f_plus;
    Complex f_minus;

    double probability_e() const;
    double probability_f() const;
    /// The same amplitudes as a canonical-basis ModeState on paths e and f.
    ModeState as_state() const;
};

/// Closed-form output for input (alpha|+> + beta|->)|a>:
///   e: sin(phi/2) exp(i(3pi/2 - phi/2)) (alpha, -beta)
///   f: cos(phi/2) exp(i(pi/2 + phi/2))  (alpha,  beta)
/// Throws std::invalid_argument unless |alpha|^2 + |beta|^2 = 1 +- 1e-9.
TbsOutput tbs_closed_form(Complex alpha, Complex beta, double phi);

/// BS1 (a,b -> c,d), mirrors on c and d, EOM(+phi) on c, EOM(-phi) on d,
/// BS2 (c,d -> e,f), both splitters balanced.
TransferMatrix tbs_composed(double phi, double mirror_phase_rad = 0);

/// Reads the e/f amplitudes out of a propagated state.
TbsOutput read_outputs(const ModeState &state);

/// cos^2(phi/2), the probability of a -> f.
double transmissivity(double phi);
/// sin^2(phi/2), the probability of a -> e.
double reflectivity(double phi);

/// First-order interference contrast between the two arms. Lumps arm
/// length mismatch, residual birefringence and wavefront mismatch.
struct InterferenceQuality {
    double mode_overlap = 1;

    void validate() const;
};

/// Reflectivity with finite contrast: 0.5 (1 - V cos phi).
double expected_reflectivity(double phi, InterferenceQuality quality);

struct FringePoint {
    double phi = 0;
    double t_est = 0;
    double r_est = 0;
    /// One standard deviation of t_est (and r_est).
    double sigma = 0;
    CountRow counts;
};

struct FringeScanConfig {
    std::vector<double> phis;
    Complex alpha = 1;
    Complex beta = 0;
    InterferenceQuality quality;
    uint64_t shots_per_point = 100000;
    HeraldedSetup setup;
    /// Gaussian per-shot phase noise left over by the phase lock.
    double phase_jitter_rad = 0;
    uint64_t seed = 0;
    unsigned workers = 0;
};

/// Monte Carlo estimate of T and R at each phase. Point k draws from a
/// generator keyed by (seed, k), so results do not depend on `workers`.
std::vector<FringePoint> fringe_scan(const FringeScanConfig &config);

void write_fringe_csv(std::ostream &out, std::span<const FringePoint> points);

class FitError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct VisibilityFit {
    double visibility;
    double visibility_sigma;
    /// phi0 in R(phi) = c0 + c1 cos(phi - phi0).
    double phase_offset;
    double mean;
    double amplitude;
};

/// Least-squares fit of R(phi) = c0 + c1 cos(phi - phi0), V = c1 / c0.
/// Inverse-variance weighted when every point carries sigma > 0,
/// unweighted otherwise. Needs at least 4 points spanning more than pi.
/// Throws FitError on degenerate data.
VisibilityFit fit_visibility(std::span<const FringePoint> points);

}  // namespace tbssim

#endif
