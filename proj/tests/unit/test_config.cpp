// Copyright 2026 The photonstat Authors
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


#include <gtest/gtest.h>

#include <set>
#include <string>

#include "photonstat/config.hpp"
#include "photonstat/errors.hpp"

using namespace photonstat;

TEST(Config, DefaultsAreValid) {
    ExperimentConfig c = default_config();
    EXPECT_EQ(c.chain.trace_len, 320);
    EXPECT_EQ(c.shots, 64000u);
    EXPECT_EQ(c.batches, 64);
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.hash().size(), 64u);
}

TEST(Config, OmittedFieldsKeepDefaults) {
    ExperimentConfig c = parse_config(R"({"shots": 640, "batches": 8, "qubit": {"gamma1_n": 1.2}})");
    EXPECT_EQ(c.shots, 640u);
    EXPECT_EQ(c.batches, 8);
    EXPECT_DOUBLE_EQ(c.qubit.gamma1_n, 1.2);
    EXPECT_DOUBLE_EQ(c.qubit.ec, 0.4);
    EXPECT_EQ(c.chain.trace_len, 320);
}

TEST(Config, TraceLengthDerivedFromControlPeriod) {
    ExperimentConfig c = parse_config(R"({"chain": {"sample_rate": 400e6}})");
    EXPECT_EQ(c.chain.trace_len, 640);
}

TEST(Config, ShotsMustDivideIntoBatches) {
    try {
        parse_config(R"({"shots": 1000, "batches": 64})");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError &e) {
        EXPECT_NE(std::string(e.what()).find("divisible"), std::string::npos);
    }
    EXPECT_THROW(parse_config(R"({"batches": 1, "shots": 10})"), ValidationError);
    EXPECT_THROW(parse_config(R"({"shots": 0})"), ValidationError);
}

TEST(Config, NyquistViolationRejected) {
    EXPECT_THROW(parse_config(R"({"chain": {"if_freq": 150e6}})"), ValidationError);
}

TEST(Config, UnknownFieldReportsLine) {
    const std::string text = "{\n  \"shots\": 640,\n  \"chain\": {\n    \"gain_dbb\": 70\n  }\n}\n";
    try {
        parse_config(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 4u);
        EXPECT_EQ(e.field(), "chain.gain_dbb");
    }
}

TEST(Config, WrongTypeReportsField) {
    const std::string text = "{\n  \"seed\": \"seven\"\n}";
    try {
        parse_config(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.field(), "seed");
    }
    EXPECT_THROW(parse_config(R"({"state": {"kind": "squeezed"}})"), ParseError);
    EXPECT_THROW(parse_config(R"({"correlator": {"background": "none"}})"), ParseError);
}

TEST(Config, MalformedJsonReportsLine) {
    try {
        parse_config("{\n  \"shots\": 640,\n  \"seed\": ,\n}");
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(parse_config("[1, 2]"), ParseError);
}

TEST(Config, RoundTripThroughJson) {
    ExperimentConfig c = parse_config(R"({"seed": 99, "state": {"kind": "coherent", "alpha": [0.3, -0.2]},
                                          "correlator": {"background": "pure_noise", "gate_halfwidth": -1}})");
    ExperimentConfig d = parse_config(c.to_json().dump());
    EXPECT_EQ(c.to_json(), d.to_json());
    EXPECT_EQ(c.hash(), d.hash());
    EXPECT_EQ(d.state.kind, StateKind::Coherent);
    EXPECT_DOUBLE_EQ(d.state.alpha.imag(), -0.2);
    EXPECT_EQ(d.correlator.background, BackgroundMode::PureNoise);
}

TEST(Config, HashTracksResultAffectingParameters) {
    const std::vector<std::string> edits = {
        R"({"seed": 2})",
        R"({"shots": 128000})",
        R"({"qubit": {"gamma1_e": 2.7}})",
        R"({"chain": {"n_add_a": 2}})",
        R"({"train": {"gauss_sigma": 5e-9}})",
        R"({"state": {"theta_r": 1.0}})",
        R"({"spectro": {"power_dbm": {"start": -150, "stop": -120, "points": 4}}})",
        R"({"correlator": {"window": 2}})",
    };
    std::set<std::string> hashes{default_config().hash()};
    for (const auto &e : edits) {
        hashes.insert(parse_config(e).hash());
    }
    EXPECT_EQ(hashes.size(), edits.size() + 1);
    EXPECT_EQ(parse_config(R"({"workers": 4, "output": {"dir": "elsewhere"}})").hash(), default_config().hash());
}

TEST(Config, RegimeWarningIsSoft) {
    ExperimentConfig c = parse_config(R"({"qubit": {"ej_max": 6.0}})");
    EXPECT_FALSE(c.warnings.empty());
}

TEST(Config, MissingFileIsIoError) {
    EXPECT_THROW(load_config("/nonexistent/photonstat.json"), IoError);
}

TEST(Config, RangeValues) {
    Range r{0.0, 1.0, 5};
    EXPECT_EQ(r.values(), (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
    EXPECT_EQ((Range{2.0, 3.0, 1}.values()), (std::vector<double>{2.0}));
}
