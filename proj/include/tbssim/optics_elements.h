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

#ifndef TBSSIM_OPTICS_ELEMENTS_H
#define TBSSIM_OPTICS_ELEMENTS_H

#include <utility>
#include <vector>

#include "tbssim/quantum_core.h"

namespace tbssim {

/// Power transmissivity and reflectivity of a two-port splitter.
class SplittingRatio {
   public:
    /// Throws std::invalid_argument unless 0 <= transmissivity <= 1.
    explicit SplittingRatio(double transmissivity);

    static SplittingRatio balanced() { return SplittingRatio(0.5); }

    double transmissivity() const { return t_; }
    double reflectivity() const { return 1 - t_; }

   private:
    double t_;
};

enum class Polarity : int { positive = 1, negative = -1 };

/// Birefringent phase of one electro-optic modulator whose axes sit at
/// +-45 degrees. The two modulators of a tunable splitter share the phase
/// and carry opposite polarities.
struct EomSetting {
    double phase_rad = 0;
    Polarity polarity = Polarity::positive;
};

/// phi(U) = pi * U / U_pi, the linear electro-optic response.
double eom_phase_from_voltage(double volts, double half_wave_volts);

/// Polarization-independent splitter taking in_paths to out_paths with the
/// symmetric convention: transmitted amplitude sqrt(T), reflected i*sqrt(R).
///   out.first  = t * in.first + i r * in.second
///   out.second = i r * in.first + t * in.second
/// The out -> in block is the adjoint so the full matrix stays unitary;
/// untouched paths pass through. Requires four distinct paths.
TransferMatrix beam_splitter(SplittingRatio ratio, std::pair<Path, Path> in_paths, std::pair<Path, Path> out_paths);

/// Diagonal in the +-45 basis on `on_path`:
/// |+> picks up exp(+i p phi/2), |-> picks up exp(-i p phi/2).
TransferMatrix eom(EomSetting setting, Path on_path);

/// Mirror with an optional reflection phase applied to both polarizations.
/// The default is unity.
TransferMatrix mirror(Path on_path, double reflection_phase_rad = 0);

/// Scales amplitudes on the given paths by sqrt(survival).
TransferMatrix lossy_attenuator(double survival, const std::vector<Path> &on_paths);

/// Applies a 2x2 polarization unitary (in the +-45 basis) on every path.
TransferMatrix polarization_rotation(const Eigen::Matrix2cd &u);

}  // namespace tbssim

#endif
