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

#include "tbssim/tbs.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "tbssim/csv.h"
#include "tbssim/optics_elements.h"

namespace tbssim {

using std::numbers::pi;

double TbsOutput::probability_e() const {
    return std::norm(e_plus) + std::norm(e_minus);
}

double TbsOutput::probability_f() const {
    return std::norm(f_plus) + std::norm(f_minus);
}

ModeState TbsOutput::as_state() const {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(kNumModes);
    v[canonical_index({Path::e, Pol::plus})] = e_plus;
    v[canonical_index({Path::e, Pol::minus})] = e_minus;
    v[canonical_index({Path::f, Pol::plus})] = f_plus;
    v[canonical_index({Path::f, Pol::minus})] = f_minus;
    return ModeState(canonical_basis(), std::move(v));
}

TbsOutput tbs_closed_form(Complex alpha, Complex beta, double phi) {
    double n = std::norm(alpha) + std::norm(beta);
    if (std::abs(n - 1) > 1e-9) {
        throw std::invalid_argument("tbs_closed_form: input polarization is not normalized");
    }
    Complex ke = std::sin(phi / 2) * std::polar(1.0, 3 * pi / 2 - phi / 2);
    Complex kf = std::cos(phi / 2) * std::polar(1.0, pi / 2 + phi / 2);
    return {ke * alpha, -ke * beta, kf * alpha, kf * beta};
}

TransferMatrix tbs_composed(double phi, double mirror_phase_rad) {
    auto bs1 = beam_splitter(SplittingRatio::balanced(), {Path::a, Path::b}, {Path::c, Path::d});
    auto bs2 = beam_splitter(SplittingRatio::balanced(), {Path::c, Path::d}, {Path::e, Path::f});
    return compose_chain({
        bs1,
        mirror(Path::c, mirror_phase_rad),
        mirror(Path::d, mirror_phase_rad),
        eom({phi, Polarity::positive}, Path::c),
        eom({phi, Polarity::negative}, Path::d),
        bs2,
    });
}

TbsOutput read_outputs(const ModeState &state) {
    return {
        state.amplitude({Path::e, Pol::plus}),
        state.amplitude({Path::e, Pol::minus}),
        state.amplitude({Path::f, Pol::plus}),
        state.amplitude({Path::f, Pol::minus}),
    };
}

double transmissivity(double phi) {
    double c = std::cos(phi / 2);
    return c * c;
}

double reflectivity(double phi) {
    double s = std::sin(phi / 2);
    return s * s;
}

void InterferenceQuality::validate() const {
    if (!(mode_overlap >= 0 && mode_overlap <= 1)) {
        throw std::invalid_argument("InterferenceQuality: mode overlap must lie in [0, 1]");
    }
}

double expected_reflectivity(double phi, InterferenceQuality quality) {
    return 0.5 * (1 - quality.mode_overlap * std::cos(phi));
}

namespace {

/// Interferometric routing mixed with an incoherent 50/50 part.
std::pair<double, double> routing(Complex alpha, Complex beta, double phi, double contrast) {
    TbsOutput out = tbs_closed_form(alpha, beta, phi);
    double n = std::norm(alpha) + std::norm(beta);
    double pe = std::clamp(out.probability_e() / n, 0.0, 1.0);
    double pf = std::clamp(out.probability_f() / n, 0.0, 1.0);
    double half = 0.5 * (pe + pf);
    return {contrast * pf + (1 - contrast) * half, contrast * pe + (1 - contrast) * half};
}

}  // namespace

std::vector<FringePoint> fringe_scan(const FringeScanConfig &config) {
    if (config.phis.empty()) {
        throw std::invalid_argument("fringe_scan: empty phase list");
    }
    if (config.shots_per_point < 1) {
        throw std::invalid_argument("fringe_scan: shots_per_point must be at least 1");
    }
    if (!(config.phase_jitter_rad >= 0)) {
        throw std::invalid_argument("fringe_scan: phase jitter must be non-negative");
    }
    config.quality.validate();
    config.setup.validate();
    double n = std::norm(config.alpha) + std::norm(config.beta);
    if (std::abs(n - 1) > 1e-9) {
        throw std::invalid_argument("fringe_scan: input polarization is not normalized");
    }

    std::vector<FringePoint> points(config.phis.size());
    parallel_for(points.size(), config.workers, [&](std::size_t k) {
        Rng rng = make_rng(config.seed, k);
        double phi = config.phis[k];
        double v = config.quality.mode_overlap;
        CountRow row;
        row.setting_id = static_cast<int>(k);
        row.phi_rad = phi;
        if (config.phase_jitter_rad == 0) {
            auto [pf, pe] = routing(config.alpha, config.beta, phi, v);
            for (uint64_t s = 0; s < config.shots_per_point; s++) {
                record_heralded_shot(pf, pe, config.setup, rng, row);
            }
        } else {
            std::normal_distribution<double> jitter(0.0, config.phase_jitter_rad);
            for (uint64_t s = 0; s < config.shots_per_point; s++) {
                auto [pf, pe] = routing(config.alpha, config.beta, phi + jitter(rng), v);
                record_heralded_shot(pf, pe, config.setup, rng, row);
            }
        }

        FringePoint p;
        p.phi = phi;
        p.counts = row;
        if (row.cc_13 + row.cc_23 > 0) {
            TREstimate est = estimate_T_R(row);
            p.t_est = est.transmissivity;
            p.r_est = est.reflectivity;
            p.sigma = est.sigma;
        }
        points[k] = p;
    });
    return points;
}

void write_fringe_csv(std::ostream &out, std::span<const FringePoint> points) {
    out << "phi_rad,T_est,R_est,sigma\n";
    for (const auto &p : points) {
        out << format_double(p.phi) << ',' << format_double(p.t_est) << ',' << format_double(p.r_est) << ','
            << format_double(p.sigma) << '\n';
    }
}

VisibilityFit fit_visibility(std::span<const FringePoint> points) {
    if (points.size() < 4) {
        throw std::invalid_argument("fit_visibility: at least 4 points are required");
    }
    auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                        [](const FringePoint &x, const FringePoint &y) { return x.phi < y.phi; });
    if (!(hi->phi - lo->phi > pi)) {
        throw std::invalid_argument("fit_visibility: points must span more than pi of phase");
    }

    auto n = static_cast<Eigen::Index>(points.size());
    bool weighted = std::all_of(points.begin(), points.end(), [](const FringePoint &p) { return p.sigma > 0; });
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    Eigen::VectorXd w(n);
    double ymin = points[0].r_est;
    double ymax = points[0].r_est;
    for (Eigen::Index i = 0; i < n; i++) {
        const auto &p = points[static_cast<std::size_t>(i)];
        x(i, 0) = 1;
        x(i, 1) = std::cos(p.phi);
        x(i, 2) = std::sin(p.phi);
        y[i] = p.r_est;
        w[i] = weighted ? 1 / (p.sigma * p.sigma) : 1.0;
        ymin = std::min(ymin, p.r_est);
        ymax = std::max(ymax, p.r_est);
    }
    if (ymax - ymin <= 1e-15 * std::max(1.0, std::abs(ymax))) {
        throw FitError("fit_visibility: data are constant");
    }

    Eigen::Matrix3d normal = x.transpose() * w.asDiagonal() * x;
    Eigen::Vector3d rhs = x.transpose() * w.asDiagonal() * y;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
    if (!lu.isInvertible()) {
        throw FitError("fit_visibility: phases do not determine a sinusoid");
    }
    Eigen::Vector3d c = lu.solve(rhs);
    Eigen::Matrix3d cov = lu.inverse();
    if (!weighted) {
        Eigen::VectorXd resid = y - x * c;
        double dof = static_cast<double>(n - 3);
        double s2 = dof > 0 ? resid.squaredNorm() / dof : 0.0;
        cov *= s2;
    }

    double c0 = c[0];
    double amp = std::hypot(c[1], c[2]);
    if (!(c0 > 0) || amp == 0) {
        throw FitError("fit_visibility: fitted sinusoid is degenerate");
    }
    double v = amp / c0;
    Eigen::Vector3d grad(-amp / (c0 * c0), c[1] / (amp * c0), c[2] / (amp * c0));
    double var = grad.dot(cov * grad);
    return {v, std::sqrt(std::max(0.0, var)), std::atan2(c[2], c[1]), c0, amp};
}

}  // namespace tbssim
