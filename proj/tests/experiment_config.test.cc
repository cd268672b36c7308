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

#include "tbssim/experiment_config.h"

#include <numbers>
#include <sstream>

#include "gtest/gtest.h"

using namespace tbssim;

namespace {

ExperimentConfig parse_text(const std::string &text) {
    std::istringstream in(text);
    return ExperimentConfig::parse(in);
}

std::vector<Diagnostic> parse_errors(const std::string &text) {
    try {
        parse_text(text);
    } catch (const ConfigError &e) {
        return e.diagnostics();
    }
    return {};
}

bool mentions(const std::vector<Diagnostic> &d, const std::string &key, const std::string &fragment = "") {
    for (const auto &x : d) {
        if (x.key == key && x.message.find(fragment) != std::string::npos) {
            return true;
        }
    }
    return false;
}

}  // namespace

TEST(experiment_config, defaults_validate_clean) {
    ExperimentConfig c;
    ASSERT_TRUE(validate(c).empty());
    ASSERT_EQ(c.seed(), 1u);
    ASSERT_EQ(c.number("tbs.contrast"), 0.959);
    ASSERT_EQ(c.number("eom.on_time_ns"), 20);
    ASSERT_EQ(c.number("eom.rise_time_ns"), 5.6);
    ASSERT_EQ(c.number("chain.fiber_length_m"), 100);
    ASSERT_EQ(c.number("chain.group_index"), 1.468);
    ASSERT_EQ(c.text("chain.fpga_delay_ns"), "auto");
    ASSERT_EQ(c.number("hom.gamma0_squared"), 0.887);
    ASSERT_EQ(c.number("source.pump_period_ns"), 12.5);
}

TEST(experiment_config, parse_comments_and_whitespace) {
    ExperimentConfig c = parse_text("# comment\n\n  tbs.contrast =  0.953 \nrun.seed=42\nlock.enabled = false\n");
    ASSERT_EQ(c.number("tbs.contrast"), 0.953);
    ASSERT_EQ(c.seed(), 42u);
    ASSERT_FALSE(c.boolean("lock.enabled"));
}

TEST(experiment_config, parse_reports_line_diagnostics) {
    auto d = parse_errors("tbs.contrast = 0.9\nbogus.key = 1\nscan.points = many\nno equals sign\ntbs.contrast = 0.8\n");
    ASSERT_EQ(d.size(), 4u);
    ASSERT_EQ(d[0].line, 2);
    ASSERT_EQ(d[0].key, "bogus.key");
    ASSERT_NE(d[0].message.find("unknown key"), std::string::npos);
    ASSERT_EQ(d[1].line, 3);
    ASSERT_NE(d[1].message.find("integer"), std::string::npos);
    ASSERT_EQ(d[2].line, 4);
    ASSERT_EQ(d[3].line, 5);
    ASSERT_NE(d[3].message.find("duplicate"), std::string::npos);
    ASSERT_EQ(d[0].str(), "line 2: bogus.key: unknown key");
}

TEST(experiment_config, typed_values) {
    ASSERT_FALSE(parse_errors("lock.enabled = yes\n").empty());
    ASSERT_FALSE(parse_errors("source.input_polarization = Q\n").empty());
    ASSERT_FALSE(parse_errors("lock.drift_kind = brownian\n").empty());
    ASSERT_FALSE(parse_errors("tbs.contrast = nan\n").empty());
    ASSERT_FALSE(parse_errors("chain.fpga_delay_ns = soon\n").empty());
    ASSERT_TRUE(parse_errors("chain.fpga_delay_ns = 350\n").empty());
    ASSERT_TRUE(parse_errors("source.input_polarization = R\n").empty());
}

TEST(experiment_config, validate_on_time_names_both_values) {
    ExperimentConfig c;
    c.set("eom.on_time_ns", "8");
    auto d = validate(c);
    ASSERT_TRUE(mentions(d, "eom.on_time_ns", "8 ns"));
    ASSERT_TRUE(mentions(d, "eom.on_time_ns", "5.6 ns"));
}

TEST(experiment_config, validate_probability_range) {
    ExperimentConfig c;
    c.set("source.pair_probability", "1.3");
    ASSERT_TRUE(mentions(validate(c), "source.pair_probability", "outside [0, 1]"));
    ExperimentConfig d;
    d.set("detector.d2_efficiency", "-0.2");
    ASSERT_TRUE(mentions(validate(d), "detector.d2_efficiency"));
}

TEST(experiment_config, validate_gate_rate) {
    ExperimentConfig c;
    c.set("source.pair_probability", "0.05");  // 4 MHz of heralds
    ASSERT_TRUE(mentions(validate(c), "source.pair_probability", "2.5 MHz"));
    c.set("detector.d3_efficiency", "0.5");  // 2 MHz
    ASSERT_TRUE(validate(c).empty());
}

TEST(experiment_config, validate_scan_span_and_counts) {
    ExperimentConfig c;
    c.set("scan.phi_stop_rad", "3");
    ASSERT_TRUE(mentions(validate(c), "scan.phi_stop_rad"));
    ExperimentConfig d;
    d.set("scan.points", "3");
    ASSERT_TRUE(mentions(validate(d), "scan.points"));
    ExperimentConfig e;
    e.set("lock.duration_s", "0");
    ASSERT_TRUE(mentions(validate(e), "lock.duration_s"));
}

TEST(experiment_config, validate_auto_fpga_delay_reachable) {
    ExperimentConfig c;
    c.set("chain.fiber_length_m", "10");
    ASSERT_TRUE(mentions(validate(c), "chain.fpga_delay_ns"));
    c.set("chain.fpga_delay_ns", "0");
    ASSERT_FALSE(mentions(validate(c), "chain.fpga_delay_ns"));
}

TEST(experiment_config, builders_follow_keys) {
    ExperimentConfig c = parse_text(
        "scan.points = 4\nsource.input_polarization = V\ntbs.insertion_loss = 0.7\n"
        "hom.points = 3\nhom.delay_span_ns = 0.002\nhom.wavelength_mismatch_nm = 0.5\n"
        "chain.fpga_delay_ns = 360\nlock.kp = 0.4\nlock.drift_kind = step\n");
    FringeScanConfig f = c.fringe_scan_config();
    ASSERT_EQ(f.phis.size(), 4u);
    ASSERT_NEAR(f.phis[1], std::numbers::pi / 2, 1e-15);
    const double h = std::numbers::sqrt2 / 2;
    ASSERT_NEAR(std::abs(f.alpha - h), 0, 1e-15);
    ASSERT_NEAR(std::abs(f.beta + h), 0, 1e-15);
    ASSERT_NEAR(f.setup.insertion_survival, 0.3, 1e-15);

    HomScanConfig hom = c.hom_scan_config();
    ASSERT_EQ(hom.delays_ns, (std::vector<double>{-0.001, 0, 0.001}));
    ASSERT_EQ(hom.photon2.center_wavelength_nm, 808.5);
    ASSERT_NEAR(hom.gamma0 * hom.gamma0, 0.887, 1e-15);

    TimingConfig t = c.timing_config();
    ASSERT_EQ(t.fpga_delay_ns(), 360);
    ASSERT_FALSE(ExperimentConfig().timing_config().delays.fpga_delay_ns.has_value());

    LockConfig l = c.lock_config();
    ASSERT_EQ(l.gains.kp, 0.4);
    ASSERT_EQ(l.drift.kind, DriftKind::step);
}

TEST(experiment_config, to_text_round_trips) {
    ExperimentConfig c = parse_text("tbs.contrast = 0.9\nrun.seed = 7\n");
    ExperimentConfig back = parse_text(c.to_text());
    ASSERT_EQ(back.values(), c.values());
    ASSERT_EQ(ExperimentConfig::from_map(c.values()).values(), c.values());
    ASSERT_THROW(ExperimentConfig::from_map({{"nope", "1"}}), ConfigError);
}

TEST(experiment_config, experiment_names) {
    for (auto k : {ExperimentKind::fringe_scan, ExperimentKind::hom_scan, ExperimentKind::switch_trace,
                   ExperimentKind::feedforward_run, ExperimentKind::lock_sim}) {
        ASSERT_EQ(parse_experiment(experiment_name(k)), k);
    }
    ASSERT_THROW(parse_experiment("replay"), std::invalid_argument);
}
