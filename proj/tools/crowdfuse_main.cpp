// crowdfuse: simulate reject-option crowdsourcing sessions with spammers,
// estimate crowd parameters, fuse answers under several weight schemes, and
// evaluate the closed-form performance expressions.
//
// Subcommands: simulate, estimate, fuse, pc-exact, pc-asymptotic,
// experiment <preset>, payment. Exit codes: 0 ok, 2 config error,
// 3 infeasible enumeration.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "crowdfuse/analytics.hpp"
#include "crowdfuse/experiment.hpp"
#include "crowdfuse/io.hpp"

namespace {

using namespace crowdfuse;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitEnumeration = 3;

struct CommonOpts {
    std::string config_path;
    std::string in_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    bool oracle_params = false;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_option("--seed", o.seed, "master seed (overrides config)");
    cmd->add_option("--trials", o.trials, "trial count (overrides config)");
    cmd->add_option("--out", o.out_path, "output file (default stdout)");
    cmd->add_flag("--oracle-params", o.oracle_params,
                  "fuse with the true model parameters instead of estimates");
    cmd->add_option("--set", o.sets, "override config entries, e.g. --set crowd.W=100");
}

experiment::ExperimentConfig load_config(const CommonOpts& o, experiment::Preset preset) {
    nlohmann::json j;
    if (!o.config_path.empty()) j = nlohmann::json::parse(io::read_file(o.config_path));
    if (!j.contains("preset")) j["preset"] = experiment::preset_name(preset);
    for (const auto& s : o.sets) experiment::apply_override(j, s);
    auto cfg = experiment::config_from_json(j);
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.trials) cfg.trials = *o.trials;
    if (o.oracle_params) cfg.oracle_params = true;
    return cfg;
}

void emit(const CommonOpts& o, const std::string& text) {
    if (o.out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        io::write_file(o.out_path, text);
    }
}

crowd::AnswerMatrix load_matrix(const std::string& path) {
    if (path.empty()) throw std::invalid_argument("expected --in <answer-matrix file>");
    const std::string text = io::read_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
        return io::matrix_from_json(nlohmann::json::parse(text));
    return io::matrix_from_csv(text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reject-option crowdsourcing simulator and fusion toolkit"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string preset_arg;
    std::string scheme_arg = "aspt";
    std::string mu_method_arg = "gold-training";
    std::string surface_path;
    std::string outcomes_arg;
    bool csv_matrix = false;

    auto* sim = app.add_subcommand("simulate", "generate one crowd session (JSON matrix)");
    add_common(sim, o);
    sim->add_flag("--csv", csv_matrix, "emit CSV instead of JSON");

    auto* est = app.add_subcommand("estimate", "estimate crowd parameters from a matrix");
    add_common(est, o);
    est->add_option("--in", o.in_path, "answer matrix JSON")->required();
    est->add_option("--mu-method", mu_method_arg, "gold-training or majority-vote");
    est->add_option("--surface", surface_path, "write the likelihood surface CSV here");

    auto* fuse = app.add_subcommand("fuse", "fuse a matrix into a class decision");
    add_common(fuse, o);
    fuse->add_option("--in", o.in_path, "answer matrix JSON")->required();
    fuse->add_option("--scheme", scheme_arg,
                     "aspt, honest-assumed, exclude-all-definitive or majority-vote");
    fuse->add_option("--mu-method", mu_method_arg, "gold-training or majority-vote");

    auto* pce = app.add_subcommand("pc-exact", "exact P_c by profile enumeration");
    add_common(pce, o);

    auto* pca = app.add_subcommand("pc-asymptotic", "large-crowd P_c approximation");
    add_common(pca, o);

    auto* exp = app.add_subcommand("experiment", "run a preset experiment, emit CSV");
    add_common(exp, o);
    exp->add_option("preset", preset_arg,
                    "fig2-thresholds fig3-pt-sweep fig4-mu-sweep fig5-spammer-sweep "
                    "fig6-w-sweep table1-estimation custom")
        ->required();

    auto* pay = app.add_subcommand("payment", "evaluate the gold-question payment rule");
    add_common(pay, o);
    pay->add_option("--outcomes", outcomes_arg,
                    "per-gold-question outcomes, chars c (correct) s (skip) w (wrong)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (sim->parsed()) {
            auto cfg = load_config(o, experiment::Preset::Custom);
            const auto inst = crowd::generate_crowd(cfg.crowd, rng::derive(cfg.master_seed, 1));
            const auto mat =
                crowd::run_session(inst, cfg.crowd, rng::derive(cfg.master_seed, 2));
            emit(o, csv_matrix ? io::matrix_to_csv(mat) : io::matrix_to_json(mat).dump(2));
        } else if (est->parsed()) {
            const auto mat = load_matrix(o.in_path);
            const auto method = mu_method_arg == "majority-vote"
                                    ? inference::MuMethod::MajorityVote
                                    : inference::MuMethod::GoldTraining;
            const auto e = inference::estimate_crowd(mat, method);
            if (!surface_path.empty()) {
                const auto ext = inference::extreme_counts(mat);
                io::write_file(surface_path,
                               io::surface_to_csv(inference::likelihood_surface(
                                   ext.all_definitive, ext.all_skip, mat.W, e.m_hat,
                                   mat.N, mat.G)));
            }
            emit(o, io::estimates_to_json(e).dump(2));
        } else if (fuse->parsed()) {
            auto cfg = load_config(o, experiment::Preset::Custom);
            const auto mat = load_matrix(o.in_path);
            const auto method = mu_method_arg == "majority-vote"
                                    ? inference::MuMethod::MajorityVote
                                    : inference::MuMethod::GoldTraining;
            const auto kind = experiment::scheme_from_name(scheme_arg);
            inference::CrowdEstimates e;
            if (cfg.oracle_params) {
                e = experiment::oracle_estimates(cfg.crowd);
            } else if (kind != fusion::WeightScheme::Kind::MajorityVote) {
                e = inference::estimate_crowd(mat, method);
            }
            const auto scheme = experiment::make_scheme(kind, e, mat.W, mat.N);
            const auto weights = fusion::assign_weights(mat, scheme);
            const auto decision =
                fusion::classify(mat, weights, rng::derive(cfg.master_seed, 3));
            emit(o, io::decision_to_json(decision).dump(2));
        } else if (pce->parsed() || pca->parsed()) {
            auto cfg = load_config(o, experiment::Preset::Custom);
            if (pca->parsed()) cfg.profile_cap = 0;  // asymptotic-only: skip enumeration
            const auto rows = experiment::run_analytics(cfg);
            emit(o, experiment::analytics_rows_to_csv(cfg, rows));
            if (pce->parsed() && !rows.empty() && rows.front().note == "enumeration-too-large") {
                std::cerr << "pc-exact: " << rows.front().profile_count
                          << " profiles exceed the cap\n";
                return kExitEnumeration;
            }
        } else if (exp->parsed()) {
            const auto preset = experiment::preset_from_name(preset_arg);
            auto cfg = load_config(o, preset);
            switch (cfg.preset) {
                case experiment::Preset::Fig2Thresholds:
                    emit(o, experiment::fig2_rows_to_csv(cfg, experiment::run_fig2(cfg)));
                    break;
                case experiment::Preset::Table1Estimation:
                    emit(o, experiment::table1_rows_to_csv(cfg, experiment::run_table1(cfg)));
                    break;
                default:
                    emit(o, experiment::mc_rows_to_csv(cfg, experiment::run_monte_carlo(cfg)));
                    break;
            }
        } else if (pay->parsed()) {
            auto cfg = load_config(o, experiment::Preset::Custom);
            std::vector<behavior::GoldOutcome> outcomes;
            for (char c : outcomes_arg) {
                switch (c) {
                    case 'c': outcomes.push_back(behavior::GoldOutcome::Correct); break;
                    case 's': outcomes.push_back(behavior::GoldOutcome::Skipped); break;
                    case 'w': outcomes.push_back(behavior::GoldOutcome::Wrong); break;
                    default:
                        throw std::invalid_argument("payment: outcomes must be c/s/w");
                }
            }
            behavior::PaymentConfig pc(cfg.crowd.payment.threshold_T,
                                       static_cast<int>(outcomes.size()),
                                       cfg.crowd.payment.mu_max, cfg.crowd.payment.mu_min);
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.12g\n", behavior::payment(outcomes, pc));
            emit(o, buf);
        }
    } catch (const analytics::EnumerationTooLarge& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitEnumeration;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}
