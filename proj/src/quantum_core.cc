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

#include "tbssim/quantum_core.h"

#include <stdexcept>

namespace tbssim {

namespace {

void require_same_basis(const Basis &x, const Basis &y, const char *what) {
    if (x != y) {
        throw std::invalid_argument(std::string(what) + ": basis mismatch");
    }
}

}  // namespace

std::string path_name(Path p) {
    static const char *names[] = {"a", "b", "c", "d", "e", "f"};
    return names[static_cast<int>(p)];
}

std::string ModeLabel::str() const {
    return path_name(path) + (pol == Pol::plus ? "+" : "-");
}

const Basis &canonical_basis() {
    static const Basis basis = [] {
        Basis b;
        for (std::size_t p = 0; p < kNumPaths; p++) {
            b.push_back({static_cast<Path>(p), Pol::plus});
            b.push_back({static_cast<Path>(p), Pol::minus});
        }
        return b;
    }();
    return basis;
}

std::size_t canonical_index(ModeLabel label) {
    return static_cast<std::size_t>(label.path) * kNumPols + static_cast<std::size_t>(label.pol);
}

ModeState::ModeState() : basis_(canonical_basis()), amps_(Eigen::VectorXcd::Zero(kNumModes)) {
}

ModeState::ModeState(Basis basis, Eigen::VectorXcd amplitudes) : basis_(std::move(basis)), amps_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amps_.size()) != basis_.size()) {
        throw std::invalid_argument("ModeState: amplitude count does not match basis size");
    }
    for (std::size_t i = 0; i < basis_.size(); i++) {
        for (std::size_t j = i + 1; j < basis_.size(); j++) {
            if (basis_[i] == basis_[j]) {
                throw std::invalid_argument("ModeState: duplicate mode label " + basis_[i].str());
            }
        }
    }
    if (norm_squared() > 1 + 1e-12) {
        throw std::invalid_argument("ModeState: squared norm exceeds 1");
    }
}

ModeState ModeState::on_path(Path path, Complex alpha, Complex beta) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(kNumModes);
    v[canonical_index({path, Pol::plus})] = alpha;
    v[canonical_index({path, Pol::minus})] = beta;
    return ModeState(canonical_basis(), std::move(v));
}

Complex ModeState::amplitude(ModeLabel label) const {
    for (std::size_t i = 0; i < basis_.size(); i++) {
        if (basis_[i] == label) {
            return amps_[i];
        }
    }
    return 0;
}

double ModeState::path_probability(Path path) const {
    double total = 0;
    for (std::size_t i = 0; i < basis_.size(); i++) {
        if (basis_[i].path == path) {
            total += std::norm(amps_[i]);
        }
    }
    return total;
}

double ModeState::norm_squared() const {
    return amps_.squaredNorm();
}

ModeState ModeState::operator+(const ModeState &other) const {
    require_same_basis(basis_, other.basis_, "ModeState::operator+");
    ModeState out;
    out.basis_ = basis_;
    out.amps_ = amps_ + other.amps_;
    return out;
}

ModeState ModeState::operator*(Complex c) const {
    ModeState out;
    out.basis_ = basis_;
    out.amps_ = amps_ * c;
    return out;
}

TransferMatrix::TransferMatrix(Basis basis, Eigen::MatrixXcd entries)
    : basis_(std::move(basis)), entries_(std::move(entries)) {
    auto n = static_cast<Eigen::Index>(basis_.size());
    if (entries_.rows() != n || entries_.cols() != n) {
        throw std::invalid_argument("TransferMatrix: matrix must be square and match the basis size");
    }
}

TransferMatrix TransferMatrix::identity() {
    return from_canonical(Eigen::MatrixXcd::Identity(kNumModes, kNumModes));
}

TransferMatrix TransferMatrix::from_canonical(Eigen::MatrixXcd entries) {
    return TransferMatrix(canonical_basis(), std::move(entries));
}

Complex TransferMatrix::element(ModeLabel out, ModeLabel in) const {
    Eigen::Index r = -1;
    Eigen::Index c = -1;
    for (std::size_t i = 0; i < basis_.size(); i++) {
        if (basis_[i] == out) {
            r = static_cast<Eigen::Index>(i);
        }
        if (basis_[i] == in) {
            c = static_cast<Eigen::Index>(i);
        }
    }
    if (r < 0 || c < 0) {
        throw std::invalid_argument("TransferMatrix::element: label not in basis");
    }
    return entries_(r, c);
}

TransferMatrix TransferMatrix::adjoint() const {
    return TransferMatrix(basis_, entries_.adjoint());
}

double TransferMatrix::unitarity_defect() const {
    Eigen::MatrixXcd d = entries_.adjoint() * entries_ - Eigen::MatrixXcd::Identity(entries_.rows(), entries_.cols());
    return d.cwiseAbs().maxCoeff();
}

double TransferMatrix::max_singular_value() const {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(entries_);
    return svd.singularValues()[0];
}

ModeState apply(const TransferMatrix &m, const ModeState &s) {
    require_same_basis(m.basis(), s.basis(), "apply");
    return ModeState(s.basis(), m.entries() * s.amplitudes());
}

TransferMatrix compose(const TransferMatrix &first, const TransferMatrix &second) {
    require_same_basis(first.basis(), second.basis(), "compose");
    return TransferMatrix(first.basis(), second.entries() * first.entries());
}

TransferMatrix compose_chain(const std::vector<TransferMatrix> &chain) {
    if (chain.empty()) {
        return TransferMatrix::identity();
    }
    TransferMatrix acc = chain.front();
    for (std::size_t k = 1; k < chain.size(); k++) {
        acc = compose(acc, chain[k]);
    }
    return acc;
}

double global_phase_distance(const ModeState &x, const ModeState &y) {
    require_same_basis(x.basis(), y.basis(), "global_phase_equal");
    const auto &xa = x.amplitudes();
    const auto &ya = y.amplitudes();
    if (xa.isZero(0) && ya.isZero(0)) {
        throw std::invalid_argument("global_phase_equal: both states are zero");
    }
    Eigen::Index k;
    if (xa.isZero(0)) {
        ya.cwiseAbs().maxCoeff(&k);
    } else {
        xa.cwiseAbs().maxCoeff(&k);
    }
    Complex c = 1;
    Complex ratio = xa[k] * std::conj(ya[k]);
    if (std::abs(ratio) > 0) {
        c = ratio / std::abs(ratio);
    }
    return (xa - c * ya).cwiseAbs().maxCoeff();
}

bool global_phase_equal(const ModeState &x, const ModeState &y, double tol) {
    return global_phase_distance(x, y) <= tol;
}

}  // namespace tbssim
