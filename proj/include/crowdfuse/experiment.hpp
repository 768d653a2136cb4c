#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdfuse/analytics.hpp"
#include "crowdfuse/crowd.hpp"
#include "crowdfuse/fusion.hpp"
#include "crowdfuse/inference.hpp"

// Experiment presets, Monte Carlo sweeps, and CSV emission.
namespace crowdfuse::experiment {

enum class Preset {
    Fig2Thresholds,
    Fig3PTSweep,
    Fig4MuSweep,
    Fig5SpammerSweep,
    Fig6WSweep,
    Table1Estimation,
    Custom,
};

Preset preset_from_name(const std::string& name);
std::string preset_name(Preset p);

struct ExperimentConfig {
    Preset preset = Preset::Custom;
    crowd::CrowdConfig crowd;
    std::vector<fusion::WeightScheme::Kind> schemes = {
        fusion::WeightScheme::Kind::Aspt};
    int trials = 10000;
    std::uint64_t master_seed = 1;
    // Fuse with the model's true (m, mu, M0, MN) instead of the per-session
    // estimates.
    bool oracle_params = false;
    inference::MuMethod mu_method = inference::MuMethod::GoldTraining;
    // Generate separate reject-option-free sessions for the majority-vote
    // baseline instead of scoring it on the shared matrices.
    bool mv_without_reject = false;

    int table1_seeds = 20;
    int table1_sessions_per_estimate = 10;
    std::vector<int> table1_m0_grid;
    std::vector<int> table1_mn_grid;

    // sweep grids; the preset decides which one drives the run
    std::vector<double> mu_grid;
    std::vector<int> spammer_grid;  // values of M0 = MN
    std::vector<int> w_grid;
    std::vector<double> threshold_grid;
    std::vector<std::array<double, 3>> pt_grid;  // (alpha, beta, delta)

    // analytics point
    double analytics_mu = 0.75;
    double analytics_m = 0.6;
    std::uint64_t profile_cap = 100'000'000;
    long mc_trials = 0;  // 0: reuse `trials`

    std::string digest() const;
};

ExperimentConfig preset_config(Preset p);

// JSON round trip; missing keys keep preset defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Apply one "dotted.path=value" override onto a config JSON tree.
void apply_override(nlohmann::json& j, const std::string& assignment);

struct McCell {
    double pc = 0.0;
    double se = 0.0;
};

struct McRow {
    std::vector<std::pair<std::string, double>> sweep;  // named sweep coordinates
    std::vector<std::pair<std::string, McCell>> by_scheme;
    long trials = 0;
    double wall_ms = 0.0;
};

// Monte Carlo over the preset's sweep grid: per trial one crowd and session,
// estimation in the loop (unless oracle_params), every scheme scored on the
// shared matrix.
std::vector<McRow> run_monte_carlo(const ExperimentConfig& cfg);

struct ThresholdRow {
    double T = 0.0, alpha = 1.0, beta = 1.0, delta = 1.0, t_star = 0.0;
};

std::vector<ThresholdRow> run_fig2(const ExperimentConfig& cfg);

struct Table1Row {
    int M0 = 0, MN = 0;
    int seed_index = 0;
    int M0_hat = 0, MN_hat = 0;
};

// Estimation-accuracy grid; each cell is estimated from
// table1_sessions_per_estimate pooled sessions of one crowd.
std::vector<Table1Row> run_table1(const ExperimentConfig& cfg);

struct AnalyticsRow {
    int W = 0, M0 = 0, MN = 0, N = 0;
    double mu = 0.0, m = 0.0;
    std::string scheme;
    double pc_exact = 0.0;  // NaN when the enumeration was refused
    std::uint64_t profile_count = 0;
    double pc_asymptotic = 0.0;
    double mean = 0.0, var = 0.0;
    double pc_mc = 0.0, se_mc = 0.0;
    long mc_trials = 0;
    double wall_ms = 0.0;
    std::string note;
};

// Exact vs asymptotic vs Monte Carlo at the analytics point (degenerate
// (m, mu) crowd, no gold columns, oracle weights).
std::vector<AnalyticsRow> run_analytics(const ExperimentConfig& cfg);

std::string scheme_name(fusion::WeightScheme::Kind k);
fusion::WeightScheme::Kind scheme_from_name(const std::string& name);

// Build the per-trial weight scheme from estimates (or oracle values).
fusion::WeightScheme make_scheme(fusion::WeightScheme::Kind kind,
                                 const inference::CrowdEstimates& est, int W, int N);

// True population parameters of a config point, for oracle-mode fusion.
inference::CrowdEstimates oracle_estimates(const crowd::CrowdConfig& c);

std::string mc_rows_to_csv(const ExperimentConfig& cfg, const std::vector<McRow>& rows);
std::string fig2_rows_to_csv(const ExperimentConfig& cfg,
                             const std::vector<ThresholdRow>& rows);
std::string table1_rows_to_csv(const ExperimentConfig& cfg,
                               const std::vector<Table1Row>& rows);
std::string analytics_rows_to_csv(const ExperimentConfig& cfg,
                                  const std::vector<AnalyticsRow>& rows);

}  // namespace crowdfuse::experiment
