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

#include <boost/math/distributions/chi_squared.hpp>
#include <numbers>
#include <sstream>

#include "gtest/gtest.h"
#include "tbssim/tbs.h"

using namespace tbssim;

namespace {

uint64_t count_clicks(double prob, DetectorModel model, double window, uint64_t shots, uint64_t seed) {
    Rng rng(seed);
    const double probs[] = {prob};
    const DetectorModel models[] = {model};
    uint64_t n = 0;
    for (uint64_t s = 0; s < shots; s++) {
        n += sample_clicks(probs, models, window, rng).clicked[0];
    }
    return n;
}

/// Sorted Poisson arrival times of the given rate (per ns) on [0, duration).
std::vector<double> poisson_stream(double rate_per_ns, double duration, Rng &rng) {
    std::exponential_distribution<double> gap(rate_per_ns);
    std::vector<double> out;
    for (double t = gap(rng); t < duration; t += gap(rng)) {
        out.push_back(t);
    }
    return out;
}

}  // namespace

TEST(detection, detector_model_validation) {
    DetectorModel m;
    ASSERT_NO_THROW(m.validate());
    m.efficiency = 1.5;
    ASSERT_THROW(m.validate(), std::invalid_argument);
    m.efficiency = 0.5;
    m.dark_count_rate_hz = -1;
    ASSERT_THROW(m.validate(), std::invalid_argument);
    m.dark_count_rate_hz = 0;
    m.dead_time_ns = -2;
    ASSERT_THROW(m.validate(), std::invalid_argument);
}

TEST(detection, sample_clicks_certain) {
    ASSERT_EQ(count_clicks(1, {}, 3, 1000, 1), 1000u);
    ASSERT_EQ(count_clicks(0, {}, 3, 1000, 1), 0u);
}

TEST(detection, sample_clicks_product_of_bernoullis) {
    const uint64_t shots = 100000;
    DetectorModel m;
    m.efficiency = 0.6;
    double rate = static_cast<double>(count_clicks(0.5, m, 3, shots, 2)) / shots;
    double sigma = std::sqrt(0.3 * 0.7 / shots);
    ASSERT_NEAR(rate, 0.30, 3 * sigma);
}

TEST(detection, dark_click_probability) {
    DetectorModel m;
    m.dark_count_rate_hz = 100;
    ASSERT_NEAR(m.dark_click_probability(5), 5e-7, 1e-12);
    m.dark_count_rate_hz = 2e7;
    ASSERT_NEAR(m.dark_click_probability(50), 1 - std::exp(-1.0), 1e-15);
    m.dark_count_rate_hz = 1e7;
    double p = m.dark_click_probability(10);
    const uint64_t shots = 200000;
    double rate = static_cast<double>(count_clicks(0, m, 10, shots, 3)) / shots;
    ASSERT_NEAR(rate, p, 4 * std::sqrt(p * (1 - p) / shots));
}

TEST(detection, sample_clicks_exclusive_outcomes) {
    Rng rng(4);
    const double probs[] = {0.5, 0.5};
    const DetectorModel models[] = {{}, {}};
    for (int s = 0; s < 1000; s++) {
        ClickSet c = sample_clicks(probs, models, 3, rng);
        ASSERT_TRUE(c.clicked[0] != c.clicked[1]);
        ASSERT_TRUE(c.any());
    }
    const double too_much[] = {0.6, 0.5};
    ASSERT_THROW(sample_clicks(too_much, models, 3, rng), std::invalid_argument);
    const double edge[] = {0.5, 0.5 + 5e-10};
    ASSERT_NO_THROW(sample_clicks(edge, models, 3, rng));
    const DetectorModel one[] = {{}};
    ASSERT_THROW(sample_clicks(probs, one, 3, rng), std::invalid_argument);
}

TEST(detection, seed_determinism) {
    DetectorModel m;
    m.efficiency = 0.4;
    m.dark_count_rate_hz = 1e6;
    ASSERT_EQ(count_clicks(0.7, m, 10, 10000, 99), count_clicks(0.7, m, 10, 10000, 99));
}

TEST(detection, efficiency_composition) {
    // eta1 then eta2 versus a single eta1 * eta2 stage, 1e6 shots each,
    // compared with a 2x2 contingency chi-square.
    const uint64_t shots = 1000000;
    const double eta1 = 0.7;
    const double eta2 = 0.55;
    Rng rng(5);
    std::bernoulli_distribution first(eta1);
    std::bernoulli_distribution second(eta2);
    uint64_t two_stage = 0;
    for (uint64_t s = 0; s < shots; s++) {
        two_stage += first(rng) && second(rng);
    }
    DetectorModel m;
    m.efficiency = eta1 * eta2;
    uint64_t one_stage = count_clicks(1, m, 3, shots, 6);

    double a = static_cast<double>(two_stage);
    double b = static_cast<double>(one_stage);
    double n = static_cast<double>(shots);
    double p = (a + b) / (2 * n);
    double chi2 = 0;
    for (double k : {a, b}) {
        chi2 += (k - n * p) * (k - n * p) / (n * p) + (k - n * p) * (k - n * p) / (n * (1 - p));
    }
    boost::math::chi_squared dist(1);
    ASSERT_LT(chi2, boost::math::quantile(dist, 0.999));
}

TEST(detection, coincide_examples) {
    std::vector<double> a{1, 5, 9, 20};
    ASSERT_EQ(coincide(a, a, 3), 4u);
    ASSERT_EQ(coincide(std::vector<double>{0, 100}, std::vector<double>{6, 106}, 3), 0u);
    ASSERT_EQ(coincide(std::vector<double>{0}, std::vector<double>{1.5}, 3), 1u);
    ASSERT_EQ(coincide(std::vector<double>{0}, std::vector<double>{1.6}, 3), 0u);
    // Each click is used once.
    ASSERT_EQ(coincide(std::vector<double>{0, 0.1}, std::vector<double>{0.05}, 3), 1u);
    ASSERT_THROW(coincide(std::vector<double>{2, 1}, a, 3), std::invalid_argument);
    ASSERT_THROW(coincide(a, a, 0), std::invalid_argument);
}

TEST(detection, accidental_rate) {
    // Uncorrelated Poisson streams: accidentals ~ r1 r2 w T.
    Rng rng(7);
    const double r1 = 1e-3;  // per ns (1 MHz)
    const double r2 = 2e-3;
    const double w = 3;
    const double duration = 1e9;
    auto s1 = poisson_stream(r1, duration, rng);
    auto s2 = poisson_stream(r2, duration, rng);
    double expected = r1 * r2 * w * duration;
    double got = static_cast<double>(coincide(s1, s2, w));
    ASSERT_NEAR(got, expected, 4 * std::sqrt(expected) + 0.01 * expected);
}

TEST(detection, dead_time) {
    std::vector<double> clicks{0, 10, 30, 45, 60, 100};
    ASSERT_EQ(apply_dead_time(clicks, 25), (std::vector<double>{0, 30, 60, 100}));
    ASSERT_EQ(apply_dead_time(clicks, 0), clicks);
}

TEST(detection, estimate_T_R_examples) {
    CountRow r;
    r.cc_13 = 1000;
    ASSERT_EQ(estimate_T_R(r).transmissivity, 1);
    ASSERT_EQ(estimate_T_R(r).sigma, 0);
    r.cc_23 = 1000;
    ASSERT_EQ(estimate_T_R(r).transmissivity, 0.5);
    ASSERT_NEAR(estimate_T_R(r).sigma, std::sqrt(0.25 / 2000), 1e-15);
    ASSERT_THROW(estimate_T_R(CountRow{}), std::invalid_argument);
}

TEST(detection, estimate_T_R_binomial) {
    // phi = 2 pi / 3: T = cos^2(pi/3) = 0.25.
    HeraldedSetup setup;
    Rng rng(8);
    CountRow row;
    double t = transmissivity(2 * std::numbers::pi / 3);
    ASSERT_NEAR(t, 0.25, 1e-15);
    for (int s = 0; s < 10000; s++) {
        record_heralded_shot(t, 1 - t, setup, rng, row);
    }
    ASSERT_EQ(row.cc_13 + row.cc_23, 10000u);
    TREstimate e = estimate_T_R(row);
    ASSERT_NEAR(e.transmissivity, 0.25, 3 * std::sqrt(0.25 * 0.75 / 10000));
}

TEST(detection, estimator_consistency) {
    HeraldedSetup setup;
    for (int k = 0; k < 10; k++) {
        double phi = 0.3 + 0.3 * k;
        double t = transmissivity(phi);
        Rng rng(derive_seed(9, k));
        CountRow row;
        for (int s = 0; s < 1000000; s++) {
            record_heralded_shot(t, 1 - t, setup, rng, row);
        }
        TREstimate e = estimate_T_R(row);
        ASSERT_LT(std::abs(e.transmissivity - t), 3 * std::sqrt(t * (1 - t) / 1e6)) << phi;
    }
}

TEST(detection, asymmetric_efficiency_biases_estimate) {
    HeraldedSetup setup;
    setup.d1.efficiency = 0.5;
    Rng rng(10);
    CountRow row;
    for (int s = 0; s < 200000; s++) {
        record_heralded_shot(0.5, 0.5, setup, rng, row);
    }
    // Expected T_est = 0.5*0.5 / (0.5*0.5 + 0.5) = 1/3.
    ASSERT_NEAR(estimate_T_R(row).transmissivity, 1.0 / 3, 0.005);
}

TEST(detection, count_table) {
    HeraldedSetup setup;
    setup.d3.efficiency = 0.7;
    setup.d1.dark_count_rate_hz = 1e6;
    Rng rng(11);
    CountTable table;
    table.rows.emplace_back();
    table.rows[0].phi_rad = 0.5;
    for (int s = 0; s < 10000; s++) {
        record_heralded_shot(0.4, 0.6, setup, rng, table.rows[0]);
    }
    ASSERT_TRUE(table.consistent());
    std::ostringstream out;
    table.write_csv(out);
    ASSERT_EQ(out.str().substr(0, out.str().find('\n')), "setting_id,phi_rad,singles_d1,singles_d2,singles_d3,cc_13,cc_23,shots");
    table.rows[0].cc_13 = table.rows[0].singles_d1 + 1;
    ASSERT_FALSE(table.consistent());
    ASSERT_EQ(CountRow::sigma(100), 10);
}

TEST(detection, insertion_loss_scales_rate_only) {
    HeraldedSetup lossless;
    HeraldedSetup lossy;
    lossy.insertion_survival = 0.3;
    const int shots = 1000000;
    CountRow a;
    CountRow b;
    Rng ra(12);
    Rng rb(13);
    for (int s = 0; s < shots; s++) {
        record_heralded_shot(0.75, 0.25, lossless, ra, a);
        record_heralded_shot(0.75, 0.25, lossy, rb, b);
    }
    ASSERT_NEAR(b.heralded_rate() / a.heralded_rate(), 0.3, 0.01);
    TREstimate ea = estimate_T_R(a);
    TREstimate eb = estimate_T_R(b);
    ASSERT_LT(std::abs(ea.transmissivity - eb.transmissivity), 3 * std::hypot(ea.sigma, eb.sigma));
}
