#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>

#include "crowdfuse/experiment.hpp"
#include "crowdfuse/io.hpp"

using namespace crowdfuse;

namespace {

crowd::AnswerMatrix sample_matrix(std::uint64_t seed) {
    crowd::CrowdConfig cfg;
    cfg.W = 12;
    cfg.M0 = 2;
    cfg.MN = 2;
    cfg.N = 3;
    cfg.G = 3;
    cfg.payment = behavior::PaymentConfig(0.6, 3, 1.0, 0.0);
    cfg.model = crowd::SkipCorrectModel{crowd::ScalarDist::uniform(0.2, 0.8),
                                        crowd::ScalarDist::uniform(0.5, 1.0)};
    return crowd::run_session(crowd::generate_crowd(cfg, seed), cfg, seed + 1);
}

std::string run_cli(const std::string& args, int expect_code, const std::string& tmp) {
    const std::string cmd =
        std::string(CROWDFUSE_CLI_PATH) + " " + args + " >" + tmp + " 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    CHECK(WEXITSTATUS(rc) == expect_code);
    return io::read_file(tmp);
}

std::string scratch_dir() {
    const std::string dir = "/tmp/crowdfuse_test";
    REQUIRE(std::system(("mkdir -p " + dir).c_str()) == 0);
    return dir;
}

}  // namespace

TEST_CASE("answer matrix JSON round trip") {
    const auto m = sample_matrix(8);
    const auto j = io::matrix_to_json(m);
    const auto back = io::matrix_from_json(j);
    CHECK(back.W == m.W);
    CHECK(back.N == m.N);
    CHECK(back.G == m.G);
    CHECK(back.responses == m.responses);
    CHECK(back.truth == m.truth);
    CHECK(back.column_kind == m.column_kind);
    CHECK(back.seed == m.seed);
    CHECK(back.config_digest == m.config_digest);
    // worker_kind is simulation-only ground truth and never leaves the process
    CHECK(!j.contains("worker_kind"));
}

TEST_CASE("answer matrix JSON validation") {
    auto j = io::matrix_to_json(sample_matrix(9));
    auto bad = j;
    bad["responses"][0] = "x1s0s1";
    CHECK_THROWS_AS(io::matrix_from_json(bad), io::ParseError);
    bad = j;
    bad["truth"] = "01";
    CHECK_THROWS_AS(io::matrix_from_json(bad), io::ParseError);
    bad = j;
    bad["column_kind"] = "cccccq";
    CHECK_THROWS_AS(io::matrix_from_json(bad), io::ParseError);
    bad = j;
    bad.erase("responses");
    CHECK_THROWS_AS(io::matrix_from_json(bad), io::ParseError);
}

TEST_CASE("answer matrix CSV round trip") {
    const auto m = sample_matrix(10);
    const auto csv = io::matrix_to_csv(m);
    int lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 3 + m.W);  // header + kind + truth rows + workers
    CHECK(csv.rfind("worker,q1,", 0) == 0);

    const auto back = io::matrix_from_csv(csv);
    CHECK(back.W == m.W);
    CHECK(back.N == m.N);
    CHECK(back.G == m.G);
    CHECK(back.responses == m.responses);
    CHECK(back.truth == m.truth);
    CHECK(back.column_kind == m.column_kind);
    CHECK_THROWS_AS(io::matrix_from_csv("worker,q1\n0,1\n"), io::ParseError);
}

TEST_CASE("estimates and decision JSON") {
    inference::CrowdEstimates e;
    e.m_hat = 0.52;
    e.mu_hat = 0.77;
    e.M0_hat = 3;
    e.MN_hat = 4;
    e.log_likelihood = -2.5;
    const auto je = io::estimates_to_json(e);
    CHECK(je.at("M0_hat") == 3);
    CHECK(je.at("method_mu") == "gold-training");

    fusion::ClassDecision d;
    d.word = {1, 0, 1};
    d.class_index = 5;
    d.per_bit_margin = {0.5, -0.25, 1.5};
    const auto jd = io::decision_to_json(d);
    CHECK(jd.at("word") == "101");
    CHECK(jd.at("class_index") == 5);
    CHECK(jd.at("margins").size() == 3);
}

TEST_CASE("config overrides") {
    nlohmann::json j;
    j["preset"] = "custom";
    experiment::apply_override(j, "crowd.W=80");
    experiment::apply_override(j, "crowd.payment.T=0.7");
    experiment::apply_override(j, "trials=123");
    experiment::apply_override(j, "schemes=[\"aspt\",\"majority-vote\"]");
    const auto cfg = experiment::config_from_json(j);
    CHECK(cfg.crowd.W == 80);
    CHECK(cfg.crowd.payment.threshold_T == doctest::Approx(0.7));
    CHECK(cfg.trials == 123);
    CHECK(cfg.schemes.size() == 2);
    CHECK_THROWS_AS(experiment::apply_override(j, "no-equals-sign"),
                    std::invalid_argument);
}

TEST_CASE("config JSON round trip") {
    auto cfg = experiment::preset_config(experiment::Preset::Fig4MuSweep);
    cfg.trials = 777;
    cfg.master_seed = 99;
    const auto back = experiment::config_from_json(experiment::config_to_json(cfg));
    CHECK(back.preset == experiment::Preset::Fig4MuSweep);
    CHECK(back.trials == 777);
    CHECK(back.master_seed == 99);
    CHECK(back.mu_grid == cfg.mu_grid);
    CHECK(back.schemes == cfg.schemes);
    CHECK(back.digest() == cfg.digest());
}

#ifdef CROWDFUSE_CLI_PATH

TEST_CASE("cli: simulate, estimate, fuse pipeline") {
    const std::string dir = scratch_dir();
    const std::string tmp = dir + "/out.txt";
    const std::string matrix_path = dir + "/matrix.json";

    run_cli("simulate --seed 12 --set crowd.W=40 --set crowd.M0=5 --set crowd.MN=5 "
            "--out " +
                matrix_path,
            0, tmp);
    const auto m = io::matrix_from_json(nlohmann::json::parse(io::read_file(matrix_path)));
    CHECK(m.W == 40);

    const auto est_out = run_cli(
        "estimate --in " + matrix_path + " --surface " + dir + "/surface.csv", 0, tmp);
    const auto je = nlohmann::json::parse(est_out);
    CHECK(je.contains("m_hat"));
    CHECK(je.contains("MN_hat"));
    const auto surface = io::read_file(dir + "/surface.csv");
    CHECK(surface.rfind("M0,MN,log_likelihood", 0) == 0);

    const auto fuse_out = run_cli("fuse --in " + matrix_path + " --scheme aspt", 0, tmp);
    const auto jd = nlohmann::json::parse(fuse_out);
    CHECK(jd.at("word").get<std::string>().size() == 3);

    // majority vote needs no estimation
    run_cli("fuse --in " + matrix_path + " --scheme majority-vote", 0, tmp);

    // batch fusion accepts the CSV form too, with identical results
    const std::string csv_path = dir + "/matrix.csv";
    run_cli("simulate --seed 12 --set crowd.W=40 --set crowd.M0=5 --set crowd.MN=5 "
            "--csv --out " +
                csv_path,
            0, tmp);
    const auto fuse_csv = run_cli("fuse --in " + csv_path + " --scheme aspt", 0, tmp);
    CHECK(nlohmann::json::parse(fuse_csv).at("word") == jd.at("word"));
}

TEST_CASE("cli: exit codes") {
    const std::string dir = scratch_dir();
    const std::string tmp = dir + "/out2.txt";

    // config errors exit 2
    run_cli("simulate --set crowd.W=-3", 2, tmp);
    run_cli("estimate --in /nonexistent/matrix.json", 2, tmp);
    run_cli("nonsense-subcommand", 2, tmp);

    // refused enumerations exit 3 and report the profile count
    const auto out = run_cli(
        "pc-exact --set crowd.W=50 --set crowd.M0=7 --set crowd.MN=7 --set crowd.N=3 "
        "--set analytics.profile_cap=1000000 --set trials=10",
        3, tmp);
    CHECK(out.find("41966288") != std::string::npos);
}

TEST_CASE("cli: pc-exact emits a CSV row that matches the library") {
    const std::string dir = scratch_dir();
    const std::string tmp = dir + "/out3.txt";
    const auto out = run_cli(
        "pc-exact --set crowd.W=10 --set crowd.M0=2 --set crowd.MN=2 --set crowd.N=2 "
        "--set analytics.mu=0.75 --set analytics.m=0.6 --set trials=2000 --seed 4",
        0, tmp);
    CHECK(out.find("pc_exact") != std::string::npos);
    const analytics::ProfileContext ctx{10, 2, 2, 2, 0.75, 0.6};
    const auto res =
        analytics::exact_pc(ctx, fusion::WeightScheme::aspt({}), 1000000);
    char expect[32];
    std::snprintf(expect, sizeof expect, "%.6f", res.pc);
    CHECK(out.find(std::string(expect).substr(0, 7)) != std::string::npos);
}

TEST_CASE("cli: experiment presets emit CSV") {
    const std::string dir = scratch_dir();
    const std::string tmp = dir + "/out5.txt";
    const auto fig2 = run_cli("experiment fig2-thresholds", 0, tmp);
    CHECK(fig2.find("t_star") != std::string::npos);
    const auto t1 = run_cli(
        "experiment table1-estimation --set \"table1.m0_grid=[1]\" "
        "--set \"table1.mn_grid=[3]\" --set table1.seeds=2 "
        "--set table1.sessions_per_estimate=3 --seed 6",
        0, tmp);
    CHECK(t1.find("M0_hat") != std::string::npos);
    const auto unknown = run_cli("experiment no-such-preset", 2, tmp);
    CHECK(unknown.find("unknown preset") != std::string::npos);
}

TEST_CASE("cli: payment") {
    const std::string dir = scratch_dir();
    const std::string tmp = dir + "/out4.txt";
    const auto out = run_cli("payment --outcomes sss --set crowd.payment.T=0.6", 0, tmp);
    CHECK(out.find("0.216") != std::string::npos);
    run_cli("payment --outcomes cxw", 2, tmp);
}

#endif  // CROWDFUSE_CLI_PATH
