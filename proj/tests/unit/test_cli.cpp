// Copyright 2026 The rmkit Authors
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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "rmkit/cli.hpp"
#include "rmkit/dataset.hpp"

namespace rmkit {
namespace {

namespace fs = std::filesystem;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string> &args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("rmkit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        config = (dir / "ghz.json").string();
        std::ofstream(config) << R"({"state":{"kind":"ghz","n":3},"m":400,"k":4,"seed":11,"ensemble":"clifford"})";
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string path(const std::string &name) const { return (dir / name).string(); }

    fs::path dir;
    std::string config;
};

TEST(CliParse, QubitLists) {
    EXPECT_EQ(parse_qubits("0,2,5"), (Qubits{0, 2, 5}));
    EXPECT_EQ(parse_qubits("1-3"), (Qubits{1, 2, 3}));
    EXPECT_EQ(parse_qubits("0-1,4"), (Qubits{0, 1, 4}));
    EXPECT_THROW(parse_qubits("3-1"), Error);
    EXPECT_THROW(parse_qubits("a"), Error);
    EXPECT_THROW(parse_qubits(""), Error);
}

TEST(CliParse, OverridesCreateNestedKeys) {
    nlohmann::json cfg = {{"state", {{"kind", "ghz"}, {"n", 3}}}};
    apply_override(cfg, "state.n=5");
    apply_override(cfg, "ensemble=haar");
    apply_override(cfg, "state.noise.p=0.1");
    EXPECT_EQ(cfg["state"]["n"], 5);
    EXPECT_EQ(cfg["ensemble"], "haar");
    EXPECT_DOUBLE_EQ(cfg["state"]["noise"]["p"].get<double>(), 0.1);
    EXPECT_THROW(apply_override(cfg, "novalue"), Error);
}

TEST(CliParse, ExitCodeMapping) {
    EXPECT_EQ(exit_code_for(ErrorKind::kConfig), kExitConfig);
    EXPECT_EQ(exit_code_for(ErrorKind::kInvalidArgument), kExitConfig);
    EXPECT_EQ(exit_code_for(ErrorKind::kSizeCap), kExitSizeCap);
    EXPECT_EQ(exit_code_for(ErrorKind::kMalformed), kExitData);
    EXPECT_EQ(exit_code_for(ErrorKind::kProtocol), kExitProtocol);
    EXPECT_EQ(exit_code_for(ErrorKind::kNoData), kExitNoData);
}

TEST(CliParse, StateDescriptions) {
    const auto s = parse_state({{"kind", "computational"}, {"bits", "101"}});
    EXPECT_EQ(n_qubits(s), 3u);
    EXPECT_THROW(parse_state({{"kind", "nonsense"}}), Error);
    EXPECT_THROW(parse_state({{"kind", "ghz"}}), Error);
    const auto h = parse_hamiltonian({{"kind", "tfim"}, {"n", 4}, {"J", 1.0}, {"h", {0.5, 0.6, 0.7, 0.8}}});
    EXPECT_EQ(h.n_qubits(), 4u);
    EXPECT_THROW(parse_hamiltonian({{"kind", "tfim"}, {"n", 4}, {"J", 1.0}, {"h", {0.5}}}), Error);
}

TEST_F(CliTest, MeasureIsDeterministicAcrossThreadCounts) {
    const auto a = run({"--threads", "1", "measure", "--config", config, "-o", path("a.rmds")});
    const auto b = run({"--threads", "8", "measure", "--config", config, "-o", path("b.rmds")});
    ASSERT_EQ(a.code, kExitOk) << a.err;
    ASSERT_EQ(b.code, kExitOk) << b.err;
    EXPECT_EQ(slurp(path("a.rmds")), slurp(path("b.rmds")));
    const auto ea = run({"--threads", "1", "estimate", path("a.rmds"), "-e", "purity-hamming"});
    const auto eb = run({"--threads", "8", "estimate", path("a.rmds"), "-e", "purity-hamming"});
    EXPECT_EQ(ea.out, eb.out);
    EXPECT_EQ(ea.out.find("time"), std::string::npos);
}

TEST_F(CliTest, ResultRecordIsOneJsonLine) {
    ASSERT_EQ(run({"measure", "--config", config, "-o", path("a.rmds")}).code, kExitOk);
    const auto r = run({"estimate", path("a.rmds"), "-e", "pauli", "--pauli", "XXX"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    ASSERT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["schema"], "rmres/1");
    EXPECT_EQ(j["command"], "estimate");
    EXPECT_EQ(j["dataset_digest"], dataset_digest(read_dataset(path("a.rmds"))));
    EXPECT_NEAR(j["result"]["value"].get<double>(), 1.0, 5 * j["result"]["std_error"].get<double>());
}

TEST_F(CliTest, UsageErrorsExitTwo) {
    EXPECT_EQ(run({"measure", "--config", config, "--m", "0", "-o", path("a.rmds")}).code, kExitConfig);
    EXPECT_EQ(run({"measure", "--config", config}).code, kExitConfig);  // no output path
    EXPECT_EQ(run({"nosuchcommand"}).code, kExitConfig);
    EXPECT_EQ(run({"measure", "--config", config, "--set", "state.kind=bogus", "-o", path("a.rmds")}).code,
              kExitConfig);
    ASSERT_EQ(run({"measure", "--config", config, "-o", path("a.rmds")}).code, kExitOk);
    EXPECT_EQ(run({"estimate", path("a.rmds"), "-e", "unknown"}).code, kExitConfig);
    EXPECT_EQ(run({"estimate", path("a.rmds"), "-e", "pauli"}).code, kExitConfig);
    EXPECT_EQ(run({"estimate", path("a.rmds"), "-e", "pauli", "--pauli", "XX"}).code, kExitConfig);
}

TEST_F(CliTest, DataErrorsExitFour) {
    EXPECT_EQ(run({"estimate", path("missing.rmds"), "-e", "purity-hamming"}).code, kExitData);
    std::ofstream(path("bad.rmds")) << "not a dataset\n";
    EXPECT_EQ(run({"estimate", path("bad.rmds"), "-e", "purity-hamming"}).code, kExitData);
}

TEST_F(CliTest, SubsysMatchesRestriction) {
    ASSERT_EQ(run({"measure", "--config", config, "-o", path("a.rmds")}).code, kExitOk);
    write_dataset(restrict_dataset(read_dataset(path("a.rmds")), {0, 2}), path("r.rmds"));
    const auto a = nlohmann::json::parse(run({"estimate", path("a.rmds"), "-e", "purity-hamming", "--subsys", "0,2"}).out);
    const auto b = nlohmann::json::parse(run({"estimate", path("r.rmds"), "-e", "purity-hamming"}).out);
    EXPECT_EQ(a["result"], b["result"]);
}

TEST_F(CliTest, CompareRefusesDifferentSeeds) {
    ASSERT_EQ(run({"measure", "--config", config, "-o", path("a.rmds")}).code, kExitOk);
    ASSERT_EQ(run({"measure", "--config", config, "--seed", "12", "-o", path("b.rmds")}).code, kExitOk);
    ASSERT_EQ(run({"measure", "--config", config, "--shot-seed", "99", "-o", path("c.rmds")}).code, kExitOk);
    EXPECT_EQ(run({"compare", path("a.rmds"), path("b.rmds")}).code, kExitProtocol);
    EXPECT_EQ(run({"compare", path("a.rmds"), path("a.rmds")}).code, kExitProtocol);
    const auto ok = run({"compare", path("a.rmds"), path("c.rmds")});
    ASSERT_EQ(ok.code, kExitOk) << ok.err;
    EXPECT_NEAR(nlohmann::json::parse(ok.out)["result"]["fmax"]["value"].get<double>(), 1.0, 0.2);
}

TEST_F(CliTest, DfePlanRoundTrip) {
    ASSERT_EQ(run({"measure", "--config", config, "-o", path("a.rmds")}).code, kExitOk);
    std::ofstream(path("dfe.json")) << R"({"target":{"kind":"ghz","n":3},"samples":50,"seed":4})";
    const auto a = run({"dfe", path("a.rmds"), "--config", path("dfe.json"), "--plan-out", path("plan.json")});
    ASSERT_EQ(a.code, kExitOk) << a.err;
    const auto b = run({"dfe", path("a.rmds"), "--plan", path("plan.json")});
    ASSERT_EQ(b.code, kExitOk) << b.err;
    EXPECT_EQ(nlohmann::json::parse(a.out)["result"], nlohmann::json::parse(b.out)["result"]);
    std::ofstream(path("mixed.json")) << R"({"target":{"kind":"maximally_mixed","n":3},"samples":50,"seed":4})";
    EXPECT_EQ(run({"dfe", path("a.rmds"), "--config", path("mixed.json")}).code, kExitConfig);
}

TEST_F(CliTest, OtocSizeCapAndOutputs) {
    std::ofstream(path("otoc.json"))
        << R"({"hamiltonian":{"kind":"mixed_field_ising","n":3,"J":1,"hx":0.9,"hz":0.4},"w":"ZII","v":"IIX","times":[0,0.5],"m":20,"seed":2})";
    const auto r = run({"otoc", "--config", path("otoc.json"), "--csv", path("o.csv"), "--with-oracle"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_DOUBLE_EQ(j["result"]["points"][0]["value"].get<double>(), 1.0);
    EXPECT_NE(slurp(path("o.csv")).find("t,value,std_error,oracle"), std::string::npos);
    EXPECT_EQ(run({"otoc", "--config", path("otoc.json"), "--set", "hamiltonian.n=11", "--set", "w=ZIIIIIIIIII", "--set",
                   "v=IIIIIIIIIIX"})
                  .code,
              kExitSizeCap);
}

TEST_F(CliTest, HamlearnReportsFlag) {
    std::ofstream(path("mm.json")) << R"({"state":{"kind":"maximally_mixed","n":3},"m":300,"k":2,"seed":5})";
    ASSERT_EQ(run({"measure", "--config", path("mm.json"), "-o", path("mm.rmds")}).code, kExitOk);
    const auto r = run({"hamlearn", path("mm.rmds"), "--k", "2", "--r", "1"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(nlohmann::json::parse(r.out)["result"]["flagged"].get<bool>());
}

}  // namespace
}  // namespace rmkit
