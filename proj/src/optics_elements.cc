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

#include "tbssim/optics_elements.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tbssim {

SplittingRatio::SplittingRatio(double transmissivity) : t_(transmissivity) {
    if (!(transmissivity >= 0 && transmissivity <= 1)) {
        throw std::invalid_argument("SplittingRatio: transmissivity must lie in [0, 1]");
    }
}

double eom_phase_from_voltage(double volts, double half_wave_volts) {
    if (!(half_wave_volts > 0)) {
        throw std::invalid_argument("eom_phase_from_voltage: half-wave voltage must be positive");
    }
    return std::numbers::pi * volts / half_wave_volts;
}

TransferMatrix beam_splitter(SplittingRatio ratio, std::pair<Path, Path> in_paths, std::pair<Path, Path> out_paths) {
    Path ps[] = {in_paths.first, in_paths.second, out_paths.first, out_paths.second};
    for (int i = 0; i < 4; i++) {
        for (int j = i + 1; j < 4; j++) {
            if (ps[i] == ps[j]) {
                throw std::invalid_argument("beam_splitter: input and output paths must be four distinct labels");
            }
        }
    }

    Complex t = std::sqrt(ratio.transmissivity());
    Complex ir = Complex(0, 1) * std::sqrt(ratio.reflectivity());
    Eigen::Matrix2cd block;
    block << t, ir, ir, t;

    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(kNumModes, kNumModes);
    Path ins[] = {in_paths.first, in_paths.second};
    Path outs[] = {out_paths.first, out_paths.second};
    for (int pol = 0; pol < 2; pol++) {
        auto idx = [&](Path p) { return canonical_index({p, static_cast<Pol>(pol)}); };
        for (int k = 0; k < 2; k++) {
            m(idx(ins[k]), idx(ins[k])) = 0;
            m(idx(outs[k]), idx(outs[k])) = 0;
        }
        for (int o = 0; o < 2; o++) {
            for (int i = 0; i < 2; i++) {
                m(idx(outs[o]), idx(ins[i])) = block(o, i);
                m(idx(ins[i]), idx(outs[o])) = std::conj(block(o, i));
            }
        }
    }
    return TransferMatrix::from_canonical(std::move(m));
}

TransferMatrix eom(EomSetting setting, Path on_path) {
    double half = static_cast<int>(setting.polarity) * setting.phase_rad / 2;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(kNumModes, kNumModes);
    auto ip = canonical_index({on_path, Pol::plus});
    auto im = canonical_index({on_path, Pol::minus});
    m(ip, ip) = std::polar(1.0, half);
    m(im, im) = std::polar(1.0, -half);
    return TransferMatrix::from_canonical(std::move(m));
}

TransferMatrix mirror(Path on_path, double reflection_phase_rad) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(kNumModes, kNumModes);
    Complex r = std::polar(1.0, reflection_phase_rad);
    m(canonical_index({on_path, Pol::plus}), canonical_index({on_path, Pol::plus})) = r;
    m(canonical_index({on_path, Pol::minus}), canonical_index({on_path, Pol::minus})) = r;
    return TransferMatrix::from_canonical(std::move(m));
}

TransferMatrix lossy_attenuator(double survival, const std::vector<Path> &on_paths) {
    if (!(survival >= 0 && survival <= 1)) {
        throw std::invalid_argument("lossy_attenuator: survival must lie in [0, 1]");
    }
    double s = std::sqrt(survival);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(kNumModes, kNumModes);
    for (Path p : on_paths) {
        m(canonical_index({p, Pol::plus}), canonical_index({p, Pol::plus})) = s;
        m(canonical_index({p, Pol::minus}), canonical_index({p, Pol::minus})) = s;
    }
    return TransferMatrix::from_canonical(std::move(m));
}

TransferMatrix polarization_rotation(const Eigen::Matrix2cd &u) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(kNumModes, kNumModes);
    for (std::size_t p = 0; p < kNumPaths; p++) {
        m.block(2 * p, 2 * p, 2, 2) = u;
    }
    return TransferMatrix::from_canonical(std::move(m));
}

}  // namespace tbssim
