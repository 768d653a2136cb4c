#include <doctest.h>

#include <cmath>
#include <set>

#include "crowdfuse/experiment.hpp"

using namespace crowdfuse;
using namespace crowdfuse::experiment;

TEST_CASE("fig2 rows: rational threshold is the identity") {
    auto cfg = preset_config(Preset::Fig2Thresholds);
    const auto rows = run_fig2(cfg);
    CHECK(rows.size() == cfg.pt_grid.size() * cfg.threshold_grid.size());
    int rational_rows = 0;
    for (const auto& r : rows) {
        if (r.alpha == 1.0 && r.beta == 1.0 && r.delta == 1.0) {
            ++rational_rows;
            CHECK(r.t_star == doctest::Approx(r.T).epsilon(1e-12));
        } else if (r.beta * r.T >= 1.0 - r.T && r.beta > 1.0 && r.alpha < 1.0) {
            CHECK(r.t_star > r.T);  // biased workers skip more
        }
    }
    CHECK(rational_rows == static_cast<int>(cfg.threshold_grid.size()));
}

TEST_CASE("monte carlo runs are deterministic per seed") {
    auto cfg = preset_config(Preset::Fig4MuSweep);
    cfg.trials = 50;
    cfg.mu_grid = {0.75};
    cfg.master_seed = 31337;
    const auto a = run_monte_carlo(cfg);
    const auto b = run_monte_carlo(cfg);
    REQUIRE(a.size() == 1);
    REQUIRE(a.front().by_scheme.size() == 4);
    for (std::size_t i = 0; i < a.front().by_scheme.size(); ++i)
        CHECK(a.front().by_scheme[i].second.pc == b.front().by_scheme[i].second.pc);

    auto cfg2 = cfg;
    cfg2.master_seed = 31338;
    const auto c = run_monte_carlo(cfg2);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.front().by_scheme.size(); ++i)
        any_diff |= a.front().by_scheme[i].second.pc != c.front().by_scheme[i].second.pc;
    CHECK(any_diff);
}

TEST_CASE("monte carlo rows carry the sweep coordinates") {
    auto cfg = preset_config(Preset::Fig5SpammerSweep);
    cfg.trials = 20;
    cfg.spammer_grid = {0, 4};
    const auto rows = run_monte_carlo(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].sweep.front().second == 0.0);
    CHECK(rows[1].sweep.front().second == 4.0);
    const auto csv = mc_rows_to_csv(cfg, rows);
    CHECK(csv.find("pc_aspt") != std::string::npos);
    CHECK(csv.find(cfg.digest()) != std::string::npos);
}

TEST_CASE("oracle-params mode runs the same pipeline without estimation") {
    auto cfg = preset_config(Preset::Fig4MuSweep);
    cfg.trials = 200;
    cfg.mu_grid = {0.75};
    cfg.oracle_params = true;
    const auto rows = run_monte_carlo(cfg);
    const double pc = rows.front().by_scheme.front().second.pc;
    CHECK(pc > 0.5);
    CHECK(pc <= 1.0);
}

TEST_CASE("fig3 preset sweeps behavioral parameters") {
    auto cfg = preset_config(Preset::Fig3PTSweep);
    cfg.trials = 100;
    cfg.pt_grid = {{1.0, 1.0, 1.0}, {0.68, 2.0, 0.88}};
    const auto rows = run_monte_carlo(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].sweep.size() == 3);  // alpha, beta, delta
    // a loss-averse crowd at T = 0.6 skips far more, so accuracy drops
    CHECK(rows[0].by_scheme.front().second.pc >
          rows[1].by_scheme.front().second.pc - 0.2);
}

TEST_CASE("table1 runner shape and the no-extremes cell") {
    auto cfg = preset_config(Preset::Table1Estimation);
    cfg.table1_m0_grid = {1, 3};
    cfg.table1_mn_grid = {1};
    cfg.table1_seeds = 2;
    cfg.table1_sessions_per_estimate = 3;
    const auto rows = run_table1(cfg);
    CHECK(rows.size() == 2 * 1 * 2);
    const auto csv = table1_rows_to_csv(cfg, rows);
    CHECK(csv.find("M0_hat") != std::string::npos);

    // a crowd with zero planted spammers and no honest extremes estimates (0,0)
    auto clean = cfg;
    clean.crowd.M0 = 0;
    clean.crowd.MN = 0;
    clean.crowd.model = crowd::SkipCorrectModel{crowd::ScalarDist::fixed(0.5),
                                                crowd::ScalarDist::fixed(0.75)};
    clean.table1_m0_grid = {0};
    clean.table1_mn_grid = {0};
    clean.table1_seeds = 5;
    const auto zero_rows = run_table1(clean);
    for (const auto& r : zero_rows) {
        CHECK(r.M0_hat == 0);
        CHECK(r.MN_hat == 0);
    }
}

TEST_CASE("analytics runner compares three routes") {
    auto cfg = preset_config(Preset::Custom);
    cfg.crowd.W = 10;
    cfg.crowd.M0 = 2;
    cfg.crowd.MN = 2;
    cfg.crowd.N = 2;
    cfg.analytics_mu = 0.75;
    cfg.analytics_m = 0.6;
    cfg.trials = 20000;
    cfg.schemes = {fusion::WeightScheme::Kind::Aspt};
    const auto rows = run_analytics(cfg);
    REQUIRE(rows.size() == 1);
    const auto& r = rows.front();
    CHECK(r.profile_count == 630);
    CHECK(std::isfinite(r.pc_exact));
    const double se = std::max(r.se_mc, 1e-6);
    CHECK(std::abs(r.pc_exact - r.pc_mc) < 4.0 * se);
    CHECK(std::abs(r.pc_asymptotic - r.pc_exact) < 0.12);  // small-W gap
    const auto csv = analytics_rows_to_csv(cfg, rows);
    CHECK(csv.find("pc_exact") != std::string::npos);

    // the cap refusal is recorded, not fatal
    auto refused = cfg;
    refused.profile_cap = 10;
    const auto rows2 = run_analytics(refused);
    CHECK(rows2.front().note == "enumeration-too-large");
    CHECK(std::isnan(rows2.front().pc_exact));
}

TEST_CASE("estimation in the loop ignores hidden fields") {
    // corrupting worker_kind tags in a serialized matrix cannot change what
    // the estimation+fusion pipeline computes, because the tags never leave
    // the simulator; this guards the module boundary at the experiment level
    auto cfg = preset_config(Preset::Fig4MuSweep);
    cfg.trials = 30;
    cfg.mu_grid = {0.75};
    const auto rows = run_monte_carlo(cfg);
    REQUIRE(!rows.empty());

    // direct check at the matrix level: estimates equal on shuffled tags
    auto crowd_cfg = cfg.crowd;
    const auto inst = crowd::generate_crowd(crowd_cfg, 5);
    auto session = crowd::run_session(inst, crowd_cfg, 6);
    const auto before = inference::estimate_crowd(session);
    std::reverse(session.worker_kind.begin(), session.worker_kind.end());
    const auto after = inference::estimate_crowd(session);
    CHECK(before.m_hat == after.m_hat);
    CHECK(before.mu_hat == after.mu_hat);
    CHECK(before.M0_hat == after.M0_hat);
    CHECK(before.MN_hat == after.MN_hat);
}

TEST_CASE("fig6 sweeps the crowd size") {
    auto cfg = preset_config(Preset::Fig6WSweep);
    cfg.trials = 150;
    cfg.w_grid = {20, 60};
    cfg.schemes = {fusion::WeightScheme::Kind::Aspt};
    const auto rows = run_monte_carlo(cfg);
    REQUIRE(rows.size() == 2);
    // a triple-size crowd at mu = 0.75 classifies clearly better
    CHECK(rows[1].by_scheme.front().second.pc >
          rows[0].by_scheme.front().second.pc);
}

TEST_CASE("mv_without_reject produces a skip-free baseline") {
    auto cfg = preset_config(Preset::Fig4MuSweep);
    cfg.trials = 300;
    cfg.mu_grid = {0.75};
    cfg.schemes = {fusion::WeightScheme::Kind::MajorityVote};
    cfg.mv_without_reject = true;
    const auto rows = run_monte_carlo(cfg);
    const double pc_forced = rows.front().by_scheme.front().second.pc;
    cfg.mv_without_reject = false;
    const double pc_shared = run_monte_carlo(cfg).front().by_scheme.front().second.pc;
    CHECK(pc_forced > 0.2);
    CHECK(pc_shared > 0.2);
}
