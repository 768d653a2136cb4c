#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "crowdfuse/inference.hpp"

using namespace crowdfuse;
using namespace crowdfuse::inference;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

crowd::CrowdConfig make_cfg(int W, int M0, int MN, int N, int G, crowd::ScalarDist fp,
                            crowd::ScalarDist fr) {
    crowd::CrowdConfig cfg;
    cfg.W = W;
    cfg.M0 = M0;
    cfg.MN = MN;
    cfg.N = N;
    cfg.G = G;
    cfg.payment = behavior::PaymentConfig(0.6, G, 1.0, 0.0);
    cfg.model = crowd::SkipCorrectModel{fp, fr};
    return cfg;
}

crowd::AnswerMatrix simulate(const crowd::CrowdConfig& cfg, std::uint64_t seed) {
    return crowd::run_session(crowd::generate_crowd(cfg, rng::derive(seed, 1)), cfg,
                              rng::derive(seed, 2));
}

// Hand-built matrix: rows given as strings over 0/1/s, first N columns
// classification.
crowd::AnswerMatrix hand_matrix(const std::vector<std::string>& rows,
                                const std::string& truth, int N) {
    crowd::AnswerMatrix m;
    m.W = static_cast<int>(rows.size());
    const int Q = static_cast<int>(truth.size());
    m.N = N;
    m.G = Q - N;
    m.truth.resize(Q);
    m.column_kind.resize(Q);
    for (int q = 0; q < Q; ++q) {
        m.truth[q] = truth[q] == '1';
        m.column_kind[q] =
            q < N ? crowd::ColumnKind::Classification : crowd::ColumnKind::Gold;
    }
    for (const auto& row : rows)
        for (char c : row)
            m.responses.push_back(c == 's' ? crowd::Response::Skip
                                           : (c == '1' ? crowd::Response::One
                                                       : crowd::Response::Zero));
    m.worker_kind.assign(m.W, crowd::WorkerKind::Honest);
    return m;
}

}  // namespace

TEST_CASE("extreme counts") {
    auto all_t2 = make_cfg(8, 0, 8, 3, 3, crowd::ScalarDist::fixed(0.5),
                           crowd::ScalarDist::fixed(0.75));
    const auto c2 = extreme_counts(simulate(all_t2, 4));
    CHECK(c2.all_definitive == 8);
    CHECK(c2.all_skip == 0);

    auto all_t1 = make_cfg(8, 8, 0, 3, 3, crowd::ScalarDist::fixed(0.5),
                           crowd::ScalarDist::fixed(0.75));
    const auto c1 = extreme_counts(simulate(all_t1, 4));
    CHECK(c1.all_definitive == 0);
    CHECK(c1.all_skip == 8);
}

TEST_CASE("extreme counts: expectation matches the binomial oracle") {
    // honest workers with fixed p = 0.6 over 6 columns: P(all definitive) =
    // 0.4^6, so E[W_all] = MN + 36 * 0.4^6 ~ 7.147
    const auto cfg = make_cfg(50, 7, 7, 3, 3, crowd::ScalarDist::fixed(0.6),
                              crowd::ScalarDist::uniform(0.5, 1.0));
    double sum_all = 0.0, sum_none = 0.0;
    const int reps = 4000;
    for (int rep = 0; rep < reps; ++rep) {
        const auto c = extreme_counts(simulate(cfg, rep));
        CHECK(c.all_definitive >= 7);
        CHECK(c.all_skip >= 7);
        sum_all += c.all_definitive;
        sum_none += c.all_skip;
    }
    const double e_all = 7.0 + 36.0 * std::pow(0.4, 6);
    const double e_none = 7.0 + 36.0 * std::pow(0.6, 6);
    CHECK(sum_all / reps == doctest::Approx(e_all).epsilon(0.01));
    CHECK(sum_none / reps == doctest::Approx(e_none).epsilon(0.02));
}

TEST_CASE("estimate_m on hand-built matrices") {
    const auto some = hand_matrix({"110100", "ss1ss0", "011010"}, "110100", 3);
    // worker 1 is non-extreme with 4 skips; workers 0, 2 are all-definitive
    CHECK(estimate_m(some) == doctest::Approx(4.0 / 6.0));

    const auto half = hand_matrix({"1s0s1s", "111111", "ssssss"}, "110100", 3);
    // only worker 0 is non-extreme: 3 skips of 6
    CHECK(estimate_m(half) == doctest::Approx(0.5));

    const auto no_skips = hand_matrix({"1s0100", "110100"}, "110100", 3);
    // worker 0 non-extreme with one skip; worker 1 extreme
    CHECK(estimate_m(no_skips) == doctest::Approx(1.0 / 6.0));

    const auto all_extreme = hand_matrix({"111111", "ssssss"}, "110100", 3);
    CHECK_THROWS_AS(estimate_m(all_extreme), EstimationError);
}

TEST_CASE("estimate_m is consistent") {
    const auto cfg = make_cfg(200, 0, 0, 3, 3, crowd::ScalarDist::uniform(0.4, 0.8),
                              crowd::ScalarDist::uniform(0.5, 1.0));
    double acc = 0.0;
    const int reps = 40;
    for (int rep = 0; rep < reps; ++rep) acc += estimate_m(simulate(cfg, 100 + rep));
    CHECK(acc / reps == doctest::Approx(0.6).epsilon(0.02 / 0.6));
}

TEST_CASE("estimate_mu: gold training") {
    // all definitive gold answers correct -> 1.0
    const auto perfect = hand_matrix({"1s0110", "s10110", "01s110"}, "000110", 3);
    CHECK(estimate_mu(perfect, MuMethod::GoldTraining) == doctest::Approx(1.0));

    const auto cfg = make_cfg(200, 10, 10, 3, 3, crowd::ScalarDist::uniform(0.2, 0.8),
                              crowd::ScalarDist::uniform(0.5, 1.0));
    double acc = 0.0;
    const int reps = 40;
    for (int rep = 0; rep < reps; ++rep)
        acc += estimate_mu(simulate(cfg, 300 + rep), MuMethod::GoldTraining);
    CHECK(acc / reps == doctest::Approx(0.75).epsilon(0.03 / 0.75));
}

TEST_CASE("estimate_mu: the two methods agree on a large matrix") {
    const auto cfg = make_cfg(400, 20, 20, 3, 3, crowd::ScalarDist::uniform(0.2, 0.8),
                              crowd::ScalarDist::uniform(0.5, 1.0));
    const auto m = simulate(cfg, 7);
    const double gold = estimate_mu(m, MuMethod::GoldTraining);
    const double maj = estimate_mu(m, MuMethod::MajorityVote);
    CHECK(std::abs(gold - maj) < 0.05);
}

TEST_CASE("estimate_mu input validation") {
    const auto m = hand_matrix({"1s0", "s10", "01s", "0s1"}, "000", 3);  // G = 0
    CHECK_THROWS_AS(estimate_mu(m, MuMethod::GoldTraining), EstimationError);
    CHECK_NOTHROW(estimate_mu(m, MuMethod::MajorityVote));
    const auto few = hand_matrix({"1s0", "11s"}, "000", 3);
    CHECK_THROWS_AS(estimate_mu(few, MuMethod::MajorityVote), EstimationError);
}

TEST_CASE("estimators read no hidden ground truth") {
    const auto cfg = make_cfg(60, 8, 9, 3, 3, crowd::ScalarDist::uniform(0.2, 0.8),
                              crowd::ScalarDist::uniform(0.5, 1.0));
    auto m = simulate(cfg, 15);
    const auto base_gold = estimate_mu(m, MuMethod::GoldTraining);
    const auto base_maj = estimate_mu(m, MuMethod::MajorityVote);
    const auto base_m = estimate_m(m);

    // worker tags are simulation-only: shuffling them changes nothing
    auto shuffled = m;
    std::reverse(shuffled.worker_kind.begin(), shuffled.worker_kind.end());
    CHECK(estimate_mu(shuffled, MuMethod::GoldTraining) == base_gold);
    CHECK(estimate_m(shuffled) == base_m);

    // classification truth is invisible to GoldTraining
    auto corrupted = m;
    for (int q = 0; q < corrupted.columns(); ++q)
        if (corrupted.column_kind[q] == crowd::ColumnKind::Classification)
            corrupted.truth[q] ^= 1;
    CHECK(estimate_mu(corrupted, MuMethod::GoldTraining) == base_gold);

    // gold truth is invisible to MajorityVote
    auto corrupted_gold = m;
    for (int q = 0; q < corrupted_gold.columns(); ++q)
        if (corrupted_gold.column_kind[q] == crowd::ColumnKind::Gold)
            corrupted_gold.truth[q] ^= 1;
    CHECK(estimate_mu(corrupted_gold, MuMethod::MajorityVote) == base_maj);
}

TEST_CASE("spammer count likelihood: support") {
    CHECK(spammer_count_log_likelihood(3, 2, 0, 3, 10, 0.5, 2, 1) == -kInf);  // M0 > W0
    CHECK(spammer_count_log_likelihood(3, 2, 4, 0, 10, 0.5, 2, 1) == -kInf);  // MN > Wall
    CHECK(spammer_count_log_likelihood(3, 2, 3, 2, 4, 0.5, 2, 1) == -kInf);   // M0+MN > W
    CHECK_THROWS_AS(spammer_count_log_likelihood(3, 2, 0, 0, 10, 0.0, 2, 1),
                    std::domain_error);
    CHECK(std::isfinite(spammer_count_log_likelihood(3, 2, 1, 1, 10, 0.5, 2, 1)));
}

namespace {

// Independent oracle: enumerate every assignment of the H honest workers to
// {all-skip, all-definitive, mixed} under the likelihood's own generative
// model (skip-all with prob ps, else definitive-all with prob pd).
double brute_force_likelihood(int w_all, int w_none, int MN, int M0, int W, double m_hat,
                              int N, int G) {
    const int H = W - M0 - MN;
    if (H < 0 || M0 > w_none || MN > w_all) return 0.0;
    const int Q = N + G;
    const double ps = std::pow(m_hat, Q);
    const double pd = std::pow(1.0 - m_hat, Q);
    const double probs[3] = {ps, (1.0 - ps) * pd, (1.0 - ps) * (1.0 - pd)};
    double total = 0.0;
    const long combos = static_cast<long>(std::pow(3.0, H));
    for (long code = 0; code < combos; ++code) {
        long c = code;
        int skips = 0, defs = 0;
        double p = 1.0;
        for (int w = 0; w < H; ++w) {
            const int k = static_cast<int>(c % 3);
            c /= 3;
            p *= probs[k];
            skips += k == 0;
            defs += k == 1;
        }
        if (skips == w_none - M0 && defs == w_all - MN) total += p;
    }
    return total;
}

}  // namespace

TEST_CASE("spammer count likelihood equals the exhaustive oracle") {
    const int W = 8, M0 = 1, MN = 1, N = 2, G = 1;
    for (double m_hat : {0.3, 0.5, 0.7}) {
        for (int w_none = M0; w_none <= 4; ++w_none) {
            for (int w_all = MN; w_all <= 4; ++w_all) {
                if (w_none + w_all > W) continue;
                const double ll =
                    spammer_count_log_likelihood(w_all, w_none, MN, M0, W, m_hat, N, G);
                const double oracle =
                    brute_force_likelihood(w_all, w_none, MN, M0, W, m_hat, N, G);
                CHECK(std::exp(ll) == doctest::Approx(oracle).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("likelihood concentrates on MN = W_all as m_hat -> 1") {
    const auto [best, ll] = estimate_spammer_counts(5, 3, 20, 1.0 - 1e-9, 2, 1);
    CHECK(best.second == 5);
    CHECK(std::isfinite(ll));
}

TEST_CASE("estimate_spammer_counts basics") {
    const auto [zero, ll0] = estimate_spammer_counts(0, 0, 10, 0.5, 2, 1);
    CHECK(zero.first == 0);
    CHECK(zero.second == 0);
    CHECK(std::isfinite(ll0));

    // the reported maximum really is the global maximum on the grid
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto cfg = make_cfg(50, 9, 13, 3, 3, crowd::ScalarDist::fixed(0.6),
                                  crowd::ScalarDist::uniform(0.5, 1.0));
        const auto m = simulate(cfg, seed);
        const auto ext = extreme_counts(m);
        const double m_hat = estimate_m(m);
        const auto [best, best_ll] =
            estimate_spammer_counts(ext.all_definitive, ext.all_skip, m.W, m_hat, 3, 3);
        CHECK(best.first <= ext.all_skip);
        CHECK(best.second <= ext.all_definitive);
        for (const auto& pt :
             likelihood_surface(ext.all_definitive, ext.all_skip, m.W, m_hat, 3, 3))
            CHECK(pt.log_likelihood <= best_ll + 1e-9);
    }
}

TEST_CASE("likelihood concavity in M0 is logged, not asserted") {
    // the surface is usually log-concave along M0 at fixed MN; exceptions on
    // observed instances are reported so a scan of the test log reveals them
    int violations = 0, scans = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto cfg = make_cfg(50, 7, 7, 3, 3, crowd::ScalarDist::fixed(0.6),
                                  crowd::ScalarDist::uniform(0.5, 1.0));
        const auto m = simulate(cfg, 900 + seed);
        const auto ext = extreme_counts(m);
        const double m_hat = estimate_m(m);
        for (int MN = 0; MN <= ext.all_definitive; ++MN) {
            std::vector<double> along;
            for (int M0 = 0; M0 <= ext.all_skip; ++M0)
                along.push_back(spammer_count_log_likelihood(
                    ext.all_definitive, ext.all_skip, MN, M0, m.W, m_hat, 3, 3));
            for (std::size_t i = 1; i + 1 < along.size(); ++i) {
                if (!std::isfinite(along[i - 1]) || !std::isfinite(along[i]) ||
                    !std::isfinite(along[i + 1]))
                    continue;
                ++scans;
                if (along[i + 1] - along[i] > along[i] - along[i - 1] + 1e-9) ++violations;
            }
        }
    }
    MESSAGE("log-concavity scans: ", scans, ", violations: ", violations);
    CHECK(scans > 0);
}

TEST_CASE("pooled estimation recovers the planted counts") {
    const auto cfg = make_cfg(50, 9, 13, 3, 3, crowd::ScalarDist::fixed(0.6),
                              crowd::ScalarDist::uniform(0.5, 1.0));
    const auto inst = crowd::generate_crowd(cfg, 31);
    std::vector<crowd::AnswerMatrix> sessions;
    for (int r = 0; r < 10; ++r) sessions.push_back(crowd::run_session(inst, cfg, 400 + r));
    const auto est = estimate_crowd_pooled(sessions, MuMethod::GoldTraining);
    CHECK(std::abs(est.M0_hat - 9) <= 1);
    CHECK(std::abs(est.MN_hat - 13) <= 1);
    CHECK(est.mu_hat == doctest::Approx(0.75).epsilon(0.05 / 0.75));
    CHECK(est.m_hat > 0.0);
    CHECK(est.m_hat < 1.0);
}

TEST_CASE("single-session pipeline produces sane estimates") {
    const auto cfg = make_cfg(50, 7, 7, 3, 3, crowd::ScalarDist::fixed(0.6),
                              crowd::ScalarDist::uniform(0.5, 1.0));
    const auto est = estimate_crowd(simulate(cfg, 77));
    CHECK(est.mu_hat >= 0.5);
    CHECK(est.mu_hat <= 1.0);
    CHECK(est.M0_hat >= 0);
    CHECK(est.MN_hat >= 0);
    CHECK(std::isfinite(est.log_likelihood));
}
