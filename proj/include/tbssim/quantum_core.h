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

#ifndef TBSSIM_QUANTUM_CORE_H
#define TBSSIM_QUANTUM_CORE_H

#include <array>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tbssim {

using Complex = std::complex<double>;

/// Spatial modes of the interferometer. a, b are the inputs of the first
/// splitter, c, d the two arms, e, f the outputs of the second splitter.
enum class Path : int { a = 0, b, c, d, e, f };

/// Polarization along the EOM crystal axes (+45 and -45 degrees).
enum class Pol : int { plus = 0, minus };

inline constexpr std::size_t kNumPaths = 6;
inline constexpr std::size_t kNumPols = 2;
inline constexpr std::size_t kNumModes = kNumPaths * kNumPols;

struct ModeLabel {
    Path path;
    Pol pol;

    bool operator==(const ModeLabel &) const = default;
    std::string str() const;
};

std::string path_name(Path p);

/// Ordered list of mode labels. The canonical basis is
/// (a,+), (a,-), (b,+), (b,-), ..., (f,+), (f,-).
using Basis = std::vector<ModeLabel>;

const Basis &canonical_basis();
std::size_t canonical_index(ModeLabel label);

/// Single-photon state: one complex amplitude per mode of its basis.
class ModeState {
   public:
    /// All-zero state over the canonical basis.
    ModeState();
    ModeState(Basis basis, Eigen::VectorXcd amplitudes);

    /// Polarization state alpha|+> + beta|-> placed on one path of the
    /// canonical basis, every other mode zero.
    static ModeState on_path(Path path, Complex alpha, Complex beta);

    const Basis &basis() const { return basis_; }
    const Eigen::VectorXcd &amplitudes() const { return amps_; }

    Complex amplitude(ModeLabel label) const;
    /// Probability of finding the photon on `path`, summed over polarization.
    double path_probability(Path path) const;
    double norm_squared() const;

    ModeState operator+(const ModeState &other) const;
    ModeState operator*(Complex c) const;

   private:
    Basis basis_;
    Eigen::VectorXcd amps_;
};

/// Linear map between ModeStates over a fixed basis. Unitary for lossless
/// elements, subunitary for lossy ones.
class TransferMatrix {
   public:
    TransferMatrix(Basis basis, Eigen::MatrixXcd entries);

    static TransferMatrix identity();
    static TransferMatrix from_canonical(Eigen::MatrixXcd entries);

    const Basis &basis() const { return basis_; }
    const Eigen::MatrixXcd &entries() const { return entries_; }

    /// Matrix element <out|M|in>.
    Complex element(ModeLabel out, ModeLabel in) const;

    TransferMatrix adjoint() const;

    /// max |M^dagger M - I|.
    double unitarity_defect() const;
    /// Largest singular value.
    double max_singular_value() const;

   private:
    Basis basis_;
    Eigen::MatrixXcd entries_;
};

/// Throws std::invalid_argument when the bases differ.
ModeState apply(const TransferMatrix &m, const ModeState &s);

/// The element applied first comes first: result = second * first.
TransferMatrix compose(const TransferMatrix &first, const TransferMatrix &second);

/// Composes a chain in propagation order.
TransferMatrix compose_chain(const std::vector<TransferMatrix> &chain);

/// True iff some unit complex c gives max|x - c*y| <= tol. The phase c is
/// taken from the amplitude pair where |x| is largest. Throws
/// std::invalid_argument if both states are zero or the bases differ.
bool global_phase_equal(const ModeState &x, const ModeState &y, double tol);

/// max|x - c*y| for the phase c chosen as in global_phase_equal.
double global_phase_distance(const ModeState &x, const ModeState &y);

}  // namespace tbssim

#endif
