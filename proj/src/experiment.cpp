#include "crowdfuse/experiment.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "crowdfuse/io.hpp"

namespace crowdfuse::experiment {

namespace {

using fusion::WeightScheme;

constexpr std::uint64_t kCrowdTag = 21;
constexpr std::uint64_t kSessionTag = 22;
constexpr std::uint64_t kTieTag = 23;
constexpr std::uint64_t kMvCrowdTag = 24;
constexpr std::uint64_t kMvSessionTag = 25;

double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

struct SweepPoint {
    std::vector<std::pair<std::string, double>> coords;
    crowd::CrowdConfig crowd;
};

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg) {
    std::vector<SweepPoint> points;
    auto base = cfg.crowd;
    switch (cfg.preset) {
        case Preset::Fig3PTSweep: {
            for (const auto& pt : cfg.pt_grid) {
                SweepPoint p{{{"alpha", pt[0]}, {"beta", pt[1]}, {"delta", pt[2]}}, base};
                p.crowd.pt_population = crowd::PTPopulation::fixed(
                    behavior::PTParams(pt[0], pt[1], pt[2]));
                points.push_back(std::move(p));
            }
            break;
        }
        case Preset::Fig4MuSweep: {
            for (double mu : cfg.mu_grid) {
                SweepPoint p{{{"mu", mu}}, base};
                auto& sc = std::get<crowd::SkipCorrectModel>(p.crowd.model);
                sc.f_r = mu < 1.0 ? crowd::mu_to_fr(mu) : crowd::ScalarDist::fixed(1.0);
                points.push_back(std::move(p));
            }
            break;
        }
        case Preset::Fig5SpammerSweep: {
            for (int s : cfg.spammer_grid) {
                SweepPoint p{{{"M0", double(s)}, {"MN", double(s)}}, base};
                p.crowd.M0 = s;
                p.crowd.MN = s;
                points.push_back(std::move(p));
            }
            break;
        }
        case Preset::Fig6WSweep: {
            for (int w : cfg.w_grid) {
                SweepPoint p{{{"W", double(w)}}, base};
                p.crowd.W = w;
                points.push_back(std::move(p));
            }
            break;
        }
        default:
            points.push_back({{}, base});
            break;
    }
    return points;
}

}  // namespace

Preset preset_from_name(const std::string& name) {
    if (name == "fig2-thresholds") return Preset::Fig2Thresholds;
    if (name == "fig3-pt-sweep") return Preset::Fig3PTSweep;
    if (name == "fig4-mu-sweep") return Preset::Fig4MuSweep;
    if (name == "fig5-spammer-sweep") return Preset::Fig5SpammerSweep;
    if (name == "fig6-w-sweep") return Preset::Fig6WSweep;
    if (name == "table1-estimation") return Preset::Table1Estimation;
    if (name == "custom") return Preset::Custom;
    throw std::invalid_argument("unknown preset: " + name);
}

std::string preset_name(Preset p) {
    switch (p) {
        case Preset::Fig2Thresholds: return "fig2-thresholds";
        case Preset::Fig3PTSweep: return "fig3-pt-sweep";
        case Preset::Fig4MuSweep: return "fig4-mu-sweep";
        case Preset::Fig5SpammerSweep: return "fig5-spammer-sweep";
        case Preset::Fig6WSweep: return "fig6-w-sweep";
        case Preset::Table1Estimation: return "table1-estimation";
        case Preset::Custom: return "custom";
    }
    return "custom";
}

std::string scheme_name(WeightScheme::Kind k) {
    switch (k) {
        case WeightScheme::Kind::Aspt: return "aspt";
        case WeightScheme::Kind::HonestAssumed: return "honest-assumed";
        case WeightScheme::Kind::ExcludeAllDefinitive: return "exclude-all-definitive";
        case WeightScheme::Kind::MajorityVote: return "majority-vote";
    }
    return "majority-vote";
}

WeightScheme::Kind scheme_from_name(const std::string& name) {
    if (name == "aspt") return WeightScheme::Kind::Aspt;
    if (name == "honest-assumed") return WeightScheme::Kind::HonestAssumed;
    if (name == "exclude-all-definitive") return WeightScheme::Kind::ExcludeAllDefinitive;
    if (name == "majority-vote") return WeightScheme::Kind::MajorityVote;
    throw std::invalid_argument("unknown scheme: " + name);
}

ExperimentConfig preset_config(Preset p) {
    ExperimentConfig cfg;
    cfg.preset = p;
    cfg.crowd.payment = behavior::PaymentConfig(0.6, 3, 1.0, 0.0);
    cfg.crowd.N = 3;
    cfg.crowd.G = 3;
    const std::vector<WeightScheme::Kind> all = {
        WeightScheme::Kind::Aspt, WeightScheme::Kind::HonestAssumed,
        WeightScheme::Kind::ExcludeAllDefinitive, WeightScheme::Kind::MajorityVote};
    switch (p) {
        case Preset::Fig2Thresholds: {
            for (double T = 0.50; T < 0.96; T += 0.025) cfg.threshold_grid.push_back(T);
            cfg.pt_grid = {{1.0, 1.0, 1.0},  {0.69, 2.25, 0.88}, {0.69, 1.0, 0.88},
                           {0.69, 4.0, 0.88}, {0.5, 2.25, 0.88},  {1.0, 2.25, 0.88}};
            break;
        }
        case Preset::Fig3PTSweep: {
            cfg.crowd.W = 30;
            cfg.crowd.model = crowd::ConfidenceModel{0.5, crowd::ScalarDist::uniform(0.7, 0.9)};
            cfg.schemes = {WeightScheme::Kind::Aspt};
            cfg.pt_grid.push_back({1.0, 1.0, 1.0});
            for (double beta : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0})
                for (double delta : {0.7, 0.88, 1.0})
                    cfg.pt_grid.push_back({0.68, beta, delta});
            for (double alpha : {0.5, 0.6, 0.7, 0.8, 0.9, 1.0})
                for (double delta : {0.7, 0.88, 1.0})
                    cfg.pt_grid.push_back({alpha, 2.25, delta});
            break;
        }
        case Preset::Fig4MuSweep: {
            cfg.crowd.W = 50;
            cfg.crowd.M0 = 7;
            cfg.crowd.MN = 7;
            cfg.crowd.model = crowd::SkipCorrectModel{crowd::ScalarDist::uniform(0.2, 0.8),
                                                      crowd::ScalarDist::uniform(0.5, 1.0)};
            cfg.schemes = all;
            for (double mu = 0.50; mu < 0.96; mu += 0.05) cfg.mu_grid.push_back(mu);
            break;
        }
        case Preset::Fig5SpammerSweep: {
            cfg.crowd.W = 50;
            cfg.crowd.model = crowd::SkipCorrectModel{crowd::ScalarDist::uniform(0.2, 0.8),
                                                      crowd::mu_to_fr(0.75)};
            cfg.schemes = all;
            for (int s = 0; s <= 20; s += 2) cfg.spammer_grid.push_back(s);
            break;
        }
        case Preset::Fig6WSweep: {
            cfg.crowd.W = 50;
            cfg.crowd.M0 = 7;
            cfg.crowd.MN = 7;
            cfg.crowd.model = crowd::SkipCorrectModel{crowd::ScalarDist::uniform(0.2, 0.8),
                                                      crowd::mu_to_fr(0.75)};
            cfg.schemes = all;
            for (int w = 20; w <= 120; w += 10) cfg.w_grid.push_back(w);
            break;
        }
        case Preset::Table1Estimation: {
            cfg.crowd.W = 50;
            cfg.crowd.M0 = 1;
            cfg.crowd.MN = 1;
            cfg.crowd.model = crowd::SkipCorrectModel{crowd::ScalarDist::fixed(0.6),
                                                      crowd::mu_to_fr(0.75)};
            for (int m0 = 1; m0 <= 19; m0 += 2) cfg.table1_m0_grid.push_back(m0);
            for (int mn = 1; mn <= 25; mn += 2) cfg.table1_mn_grid.push_back(mn);
            break;
        }
        case Preset::Custom: {
            cfg.crowd.W = 50;
            cfg.crowd.M0 = 7;
            cfg.crowd.MN = 7;
            cfg.crowd.model = crowd::SkipCorrectModel{crowd::ScalarDist::uniform(0.2, 0.8),
                                                      crowd::mu_to_fr(0.75)};
            cfg.schemes = all;
            break;
        }
    }
    return cfg;
}

std::string ExperimentConfig::digest() const {
    const std::string dump = config_to_json(*this).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

fusion::WeightScheme make_scheme(WeightScheme::Kind kind,
                                 const inference::CrowdEstimates& est, int W, int N) {
    switch (kind) {
        case WeightScheme::Kind::Aspt:
            return WeightScheme::aspt(
                {W, est.M0_hat + est.MN_hat, est.MN_hat, est.mu_hat, est.m_hat, N});
        case WeightScheme::Kind::HonestAssumed:
            return WeightScheme::honest_assumed(est.mu_hat);
        case WeightScheme::Kind::ExcludeAllDefinitive:
            return WeightScheme::exclude_all_definitive(est.mu_hat);
        case WeightScheme::Kind::MajorityVote:
            return WeightScheme::majority_vote();
    }
    return WeightScheme::majority_vote();
}

inference::CrowdEstimates oracle_estimates(const crowd::CrowdConfig& c) {
    inference::CrowdEstimates est;
    const auto stats =
        crowd::crowd_stats(c.model, c.payment.threshold_T, c.pt_population);
    est.m_hat = stats.m;
    est.mu_hat = std::min(1.0, std::max(0.5, stats.mu));
    est.M0_hat = c.M0;
    est.MN_hat = c.MN;
    return est;
}

std::vector<McRow> run_monte_carlo(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("run_monte_carlo: trials must be >= 1");
    if (cfg.schemes.empty()) throw std::invalid_argument("run_monte_carlo: no schemes");
    const auto points = expand_sweep(cfg);
    if (points.empty()) throw std::invalid_argument("run_monte_carlo: empty sweep grid");
    std::vector<McRow> rows;
    rows.reserve(points.size());
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        const auto& point = points[pi];
        point.crowd.validate();
        const double t0 = now_ms();
        std::vector<long> wins(cfg.schemes.size(), 0);
        const auto oracle =
            cfg.oracle_params ? oracle_estimates(point.crowd) : inference::CrowdEstimates{};
        for (int trial = 0; trial < cfg.trials; ++trial) {
            const std::uint64_t ts = rng::derive(cfg.master_seed, pi, trial);
            const auto inst = crowd::generate_crowd(point.crowd, rng::derive(ts, kCrowdTag));
            const auto session =
                crowd::run_session(inst, point.crowd, rng::derive(ts, kSessionTag));
            const auto truth = session.classification_truth();
            const auto est = cfg.oracle_params
                                 ? oracle
                                 : inference::estimate_crowd(session, cfg.mu_method);
            const std::uint64_t tie_seed = rng::derive(ts, kTieTag);
            for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
                const auto kind = cfg.schemes[si];
                const crowd::AnswerMatrix* mat = &session;
                crowd::AnswerMatrix mv_session;
                if (kind == WeightScheme::Kind::MajorityVote && cfg.mv_without_reject) {
                    auto mv_cfg = point.crowd;
                    mv_cfg.force_answer = true;
                    const auto mv_inst =
                        crowd::generate_crowd(mv_cfg, rng::derive(ts, kMvCrowdTag));
                    mv_session =
                        crowd::run_session(mv_inst, mv_cfg, rng::derive(ts, kMvSessionTag));
                    mat = &mv_session;
                }
                const auto scheme = make_scheme(kind, est, point.crowd.W, point.crowd.N);
                const auto weights = fusion::assign_weights(*mat, scheme);
                const auto decision = fusion::classify(*mat, weights, tie_seed);
                const auto mat_truth = mat == &session ? truth : mat->classification_truth();
                wins[si] += decision.word == mat_truth;
            }
        }
        McRow row;
        row.sweep = point.coords;
        row.trials = cfg.trials;
        for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
            const double pc = static_cast<double>(wins[si]) / cfg.trials;
            row.by_scheme.push_back(
                {scheme_name(cfg.schemes[si]),
                 {pc, std::sqrt(pc * (1.0 - pc) / cfg.trials)}});
        }
        row.wall_ms = now_ms() - t0;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ThresholdRow> run_fig2(const ExperimentConfig& cfg) {
    std::vector<ThresholdRow> rows;
    for (const auto& pt : cfg.pt_grid) {
        const behavior::PTParams params(pt[0], pt[1], pt[2]);
        for (double T : cfg.threshold_grid)
            rows.push_back({T, pt[0], pt[1], pt[2], behavior::confidence_threshold(T, params)});
    }
    return rows;
}

std::vector<Table1Row> run_table1(const ExperimentConfig& cfg) {
    if (cfg.table1_seeds < 1 || cfg.table1_sessions_per_estimate < 1)
        throw std::invalid_argument("run_table1: seeds and sessions must be >= 1");
    std::vector<Table1Row> rows;
    std::size_t cell = 0;
    for (int m0 : cfg.table1_m0_grid) {
        for (int mn : cfg.table1_mn_grid) {
            auto cell_cfg = cfg.crowd;
            cell_cfg.M0 = m0;
            cell_cfg.MN = mn;
            cell_cfg.validate();
            for (int s = 0; s < cfg.table1_seeds; ++s) {
                const std::uint64_t cs = rng::derive(cfg.master_seed, cell, s);
                const auto inst = crowd::generate_crowd(cell_cfg, rng::derive(cs, kCrowdTag));
                std::vector<crowd::AnswerMatrix> sessions;
                sessions.reserve(cfg.table1_sessions_per_estimate);
                for (int r = 0; r < cfg.table1_sessions_per_estimate; ++r)
                    sessions.push_back(
                        crowd::run_session(inst, cell_cfg, rng::derive(cs, kSessionTag, r)));
                const auto est = inference::estimate_crowd_pooled(sessions, cfg.mu_method);
                rows.push_back({m0, mn, s, est.M0_hat, est.MN_hat});
            }
            ++cell;
        }
    }
    return rows;
}

std::vector<AnalyticsRow> run_analytics(const ExperimentConfig& cfg) {
    const analytics::ProfileContext ctx{cfg.crowd.W, cfg.crowd.M0, cfg.crowd.MN,
                                        cfg.crowd.N, cfg.analytics_mu, cfg.analytics_m};
    const auto kind = cfg.schemes.empty() ? WeightScheme::Kind::Aspt : cfg.schemes.front();
    inference::CrowdEstimates oracle;
    oracle.m_hat = ctx.m;
    oracle.mu_hat = ctx.mu;
    oracle.M0_hat = ctx.M0;
    oracle.MN_hat = ctx.MN;
    const auto scheme = make_scheme(kind, oracle, ctx.W, ctx.N);

    AnalyticsRow row;
    row.W = ctx.W;
    row.M0 = ctx.M0;
    row.MN = ctx.MN;
    row.N = ctx.N;
    row.mu = ctx.mu;
    row.m = ctx.m;
    row.scheme = scheme_name(kind);
    const double t0 = now_ms();
    try {
        const auto exact = analytics::exact_pc(ctx, scheme, cfg.profile_cap);
        row.pc_exact = exact.pc;
        row.profile_count = exact.profile_count;
    } catch (const analytics::EnumerationTooLarge& e) {
        row.pc_exact = std::nan("");
        row.profile_count = e.profile_count;
        row.note = "enumeration-too-large";
    }
    const auto mom =
        analytics::asymptotic_moments(ctx.W, ctx.M0, ctx.MN, ctx.mu, ctx.m, ctx.N);
    row.mean = mom.total_mean;
    row.var = mom.total_var;
    row.pc_asymptotic = analytics::asymptotic_pc(ctx.W, ctx.M0, ctx.MN, ctx.mu, ctx.m, ctx.N);

    // Monte Carlo with a degenerate (m, mu) crowd and no gold columns
    const long mc_trials = cfg.mc_trials > 0 ? cfg.mc_trials : cfg.trials;
    crowd::CrowdConfig mc_cfg;
    mc_cfg.W = ctx.W;
    mc_cfg.M0 = ctx.M0;
    mc_cfg.MN = ctx.MN;
    mc_cfg.N = ctx.N;
    mc_cfg.G = 0;
    mc_cfg.payment = behavior::PaymentConfig(0.6, 0, 1.0, 0.0);
    mc_cfg.model = crowd::SkipCorrectModel{crowd::ScalarDist::fixed(ctx.m),
                                           crowd::ScalarDist::fixed(ctx.mu)};
    const auto inst = crowd::generate_crowd(mc_cfg, rng::derive(cfg.master_seed, kCrowdTag));
    long wins = 0;
    for (long trial = 0; trial < mc_trials; ++trial) {
        const std::uint64_t ts = rng::derive(cfg.master_seed, 0, trial);
        const auto session = crowd::run_session(inst, mc_cfg, rng::derive(ts, kSessionTag));
        const auto weights = fusion::assign_weights(session, scheme);
        const auto decision =
            fusion::classify(session, weights, rng::derive(ts, kTieTag));
        wins += decision.word == session.classification_truth();
    }
    row.pc_mc = static_cast<double>(wins) / mc_trials;
    row.se_mc = std::sqrt(row.pc_mc * (1.0 - row.pc_mc) / mc_trials);
    row.mc_trials = mc_trials;
    row.wall_ms = now_ms() - t0;
    return {row};
}

namespace {

void csv_prelude(std::ostringstream& out, const ExperimentConfig& cfg) {
    out.precision(12);
    out << "# preset=" << preset_name(cfg.preset) << " config_digest=" << cfg.digest()
        << " master_seed=" << cfg.master_seed << "\n";
}

}  // namespace

std::string mc_rows_to_csv(const ExperimentConfig& cfg, const std::vector<McRow>& rows) {
    std::ostringstream out;
    csv_prelude(out, cfg);
    out << "config_digest,master_seed";
    if (!rows.empty()) {
        for (const auto& [k, _] : rows.front().sweep) out << ',' << k;
        for (const auto& [name, _] : rows.front().by_scheme)
            out << ",pc_" << name << ",se_" << name;
    }
    out << ",trials,wall_ms\n";
    for (const auto& r : rows) {
        out << cfg.digest() << ',' << cfg.master_seed;
        for (const auto& [_, v] : r.sweep) out << ',' << v;
        for (const auto& [_, cell] : r.by_scheme) out << ',' << cell.pc << ',' << cell.se;
        out << ',' << r.trials << ',' << r.wall_ms << "\n";
    }
    return out.str();
}

std::string fig2_rows_to_csv(const ExperimentConfig& cfg,
                             const std::vector<ThresholdRow>& rows) {
    std::ostringstream out;
    csv_prelude(out, cfg);
    out << "config_digest,master_seed,T,alpha,beta,delta,t_star\n";
    for (const auto& r : rows)
        out << cfg.digest() << ',' << cfg.master_seed << ',' << r.T << ',' << r.alpha << ','
            << r.beta << ',' << r.delta << ',' << r.t_star << "\n";
    return out.str();
}

std::string table1_rows_to_csv(const ExperimentConfig& cfg,
                               const std::vector<Table1Row>& rows) {
    std::ostringstream out;
    csv_prelude(out, cfg);
    out << "config_digest,master_seed,M0,MN,seed_index,M0_hat,MN_hat,err_M0,err_MN\n";
    for (const auto& r : rows)
        out << cfg.digest() << ',' << cfg.master_seed << ',' << r.M0 << ',' << r.MN << ','
            << r.seed_index << ',' << r.M0_hat << ',' << r.MN_hat << ','
            << r.M0_hat - r.M0 << ',' << r.MN_hat - r.MN << "\n";
    return out.str();
}

std::string analytics_rows_to_csv(const ExperimentConfig& cfg,
                                  const std::vector<AnalyticsRow>& rows) {
    std::ostringstream out;
    csv_prelude(out, cfg);
    out << "config_digest,master_seed,W,M0,MN,N,mu,m,scheme,pc_exact,profile_count,"
           "pc_asymptotic,mean,var,pc_mc,se_mc,mc_trials,wall_ms,note\n";
    for (const auto& r : rows)
        out << cfg.digest() << ',' << cfg.master_seed << ',' << r.W << ',' << r.M0 << ','
            << r.MN << ',' << r.N << ',' << r.mu << ',' << r.m << ',' << r.scheme << ','
            << r.pc_exact << ',' << r.profile_count << ',' << r.pc_asymptotic << ','
            << r.mean << ',' << r.var << ',' << r.pc_mc << ',' << r.se_mc << ','
            << r.mc_trials << ',' << r.wall_ms << ',' << r.note << "\n";
    return out.str();
}

namespace {

nlohmann::json dist_to_json(const crowd::ScalarDist& d) {
    if (d.is_fixed()) return {{"dist", "fixed"}, {"value", d.lo}};
    return {{"dist", "uniform"}, {"lo", d.lo}, {"hi", d.hi}};
}

crowd::ScalarDist dist_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("dist").get<std::string>();
    if (kind == "fixed") return crowd::ScalarDist::fixed(j.at("value").get<double>());
    if (kind == "uniform")
        return crowd::ScalarDist::uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
    throw std::invalid_argument("unknown dist kind: " + kind);
}

}  // namespace

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["preset"] = preset_name(cfg.preset);
    j["trials"] = cfg.trials;
    j["master_seed"] = cfg.master_seed;
    j["oracle_params"] = cfg.oracle_params;
    j["mu_method"] =
        cfg.mu_method == inference::MuMethod::GoldTraining ? "gold-training" : "majority-vote";
    j["mv_without_reject"] = cfg.mv_without_reject;
    nlohmann::json sch = nlohmann::json::array();
    for (auto k : cfg.schemes) sch.push_back(scheme_name(k));
    j["schemes"] = sch;
    auto& c = j["crowd"];
    c["W"] = cfg.crowd.W;
    c["M0"] = cfg.crowd.M0;
    c["MN"] = cfg.crowd.MN;
    c["N"] = cfg.crowd.N;
    c["G"] = cfg.crowd.G;
    c["payment"] = {{"T", cfg.crowd.payment.threshold_T},
                    {"mu_max", cfg.crowd.payment.mu_max},
                    {"mu_min", cfg.crowd.payment.mu_min}};
    if (const auto* sc = std::get_if<crowd::SkipCorrectModel>(&cfg.crowd.model)) {
        c["model"] = {{"type", "skip-correct"},
                      {"f_p", dist_to_json(sc->f_p)},
                      {"f_r", dist_to_json(sc->f_r)}};
    } else {
        const auto& cm = std::get<crowd::ConfidenceModel>(cfg.crowd.model);
        c["model"] = {{"type", "confidence"},
                      {"lower", cm.lower},
                      {"upper", dist_to_json(cm.upper)}};
    }
    c["pt"] = {{"alpha", dist_to_json(cfg.crowd.pt_population.alpha)},
               {"beta", dist_to_json(cfg.crowd.pt_population.beta)},
               {"delta", dist_to_json(cfg.crowd.pt_population.delta)}};
    c["redraw_per_question"] = cfg.crowd.redraw_per_question;
    c["force_answer"] = cfg.crowd.force_answer;
    auto& t1 = j["table1"];
    t1["seeds"] = cfg.table1_seeds;
    t1["sessions_per_estimate"] = cfg.table1_sessions_per_estimate;
    t1["m0_grid"] = cfg.table1_m0_grid;
    t1["mn_grid"] = cfg.table1_mn_grid;
    auto& sw = j["sweep"];
    sw["mu"] = cfg.mu_grid;
    sw["spammers"] = cfg.spammer_grid;
    sw["W"] = cfg.w_grid;
    sw["T"] = cfg.threshold_grid;
    nlohmann::json ptg = nlohmann::json::array();
    for (const auto& p : cfg.pt_grid) ptg.push_back({p[0], p[1], p[2]});
    sw["pt"] = ptg;
    auto& an = j["analytics"];
    an["mu"] = cfg.analytics_mu;
    an["m"] = cfg.analytics_m;
    an["profile_cap"] = cfg.profile_cap;
    an["mc_trials"] = cfg.mc_trials;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg = preset_config(
        j.contains("preset") ? preset_from_name(j.at("preset").get<std::string>())
                             : Preset::Custom);
    try {
        cfg.trials = j.value("trials", cfg.trials);
        cfg.master_seed = j.value("master_seed", cfg.master_seed);
        cfg.oracle_params = j.value("oracle_params", cfg.oracle_params);
        if (j.contains("mu_method"))
            cfg.mu_method = j.at("mu_method").get<std::string>() == "majority-vote"
                                ? inference::MuMethod::MajorityVote
                                : inference::MuMethod::GoldTraining;
        cfg.mv_without_reject = j.value("mv_without_reject", cfg.mv_without_reject);
        if (j.contains("schemes")) {
            cfg.schemes.clear();
            for (const auto& s : j.at("schemes"))
                cfg.schemes.push_back(scheme_from_name(s.get<std::string>()));
        }
        if (j.contains("crowd")) {
            const auto& c = j.at("crowd");
            cfg.crowd.W = c.value("W", cfg.crowd.W);
            cfg.crowd.M0 = c.value("M0", cfg.crowd.M0);
            cfg.crowd.MN = c.value("MN", cfg.crowd.MN);
            cfg.crowd.N = c.value("N", cfg.crowd.N);
            cfg.crowd.G = c.value("G", cfg.crowd.G);
            double T = cfg.crowd.payment.threshold_T;
            double mu_max = cfg.crowd.payment.mu_max;
            double mu_min = cfg.crowd.payment.mu_min;
            if (c.contains("payment")) {
                const auto& p = c.at("payment");
                T = p.value("T", T);
                mu_max = p.value("mu_max", mu_max);
                mu_min = p.value("mu_min", mu_min);
            }
            cfg.crowd.payment = behavior::PaymentConfig(T, cfg.crowd.G, mu_max, mu_min);
            if (c.contains("model")) {
                const auto& m = c.at("model");
                const std::string type = m.at("type").get<std::string>();
                if (type == "skip-correct")
                    cfg.crowd.model = crowd::SkipCorrectModel{dist_from_json(m.at("f_p")),
                                                              dist_from_json(m.at("f_r"))};
                else if (type == "confidence")
                    cfg.crowd.model = crowd::ConfidenceModel{m.value("lower", 0.5),
                                                             dist_from_json(m.at("upper"))};
                else
                    throw std::invalid_argument("unknown crowd model type: " + type);
            }
            if (c.contains("pt")) {
                const auto& p = c.at("pt");
                cfg.crowd.pt_population.alpha = dist_from_json(p.at("alpha"));
                cfg.crowd.pt_population.beta = dist_from_json(p.at("beta"));
                cfg.crowd.pt_population.delta = dist_from_json(p.at("delta"));
            }
            cfg.crowd.redraw_per_question =
                c.value("redraw_per_question", cfg.crowd.redraw_per_question);
            cfg.crowd.force_answer = c.value("force_answer", cfg.crowd.force_answer);
        } else {
            // keep payment G in sync with the (possibly defaulted) crowd G
            cfg.crowd.payment = behavior::PaymentConfig(
                cfg.crowd.payment.threshold_T, cfg.crowd.G, cfg.crowd.payment.mu_max,
                cfg.crowd.payment.mu_min);
        }
        if (j.contains("table1")) {
            const auto& t1 = j.at("table1");
            cfg.table1_seeds = t1.value("seeds", cfg.table1_seeds);
            cfg.table1_sessions_per_estimate =
                t1.value("sessions_per_estimate", cfg.table1_sessions_per_estimate);
            if (t1.contains("m0_grid"))
                cfg.table1_m0_grid = t1.at("m0_grid").get<std::vector<int>>();
            if (t1.contains("mn_grid"))
                cfg.table1_mn_grid = t1.at("mn_grid").get<std::vector<int>>();
        }
        if (j.contains("sweep")) {
            const auto& sw = j.at("sweep");
            if (sw.contains("mu")) cfg.mu_grid = sw.at("mu").get<std::vector<double>>();
            if (sw.contains("spammers"))
                cfg.spammer_grid = sw.at("spammers").get<std::vector<int>>();
            if (sw.contains("W")) cfg.w_grid = sw.at("W").get<std::vector<int>>();
            if (sw.contains("T"))
                cfg.threshold_grid = sw.at("T").get<std::vector<double>>();
            if (sw.contains("pt")) {
                cfg.pt_grid.clear();
                for (const auto& p : sw.at("pt"))
                    cfg.pt_grid.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                                           p.at(2).get<double>()});
            }
        }
        if (j.contains("analytics")) {
            const auto& an = j.at("analytics");
            cfg.analytics_mu = an.value("mu", cfg.analytics_mu);
            cfg.analytics_m = an.value("m", cfg.analytics_m);
            cfg.profile_cap = an.value("profile_cap", cfg.profile_cap);
            cfg.mc_trials = an.value("mc_trials", cfg.mc_trials);
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return cfg;
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("--set expects key=value, got: " + assignment);
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    nlohmann::json value;
    try {
        value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
        value = raw;  // bare strings stay strings
    }
    nlohmann::json* node = &j;
    std::size_t pos = 0;
    while (true) {
        const auto dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot - pos);
        if (key.empty()) throw std::invalid_argument("--set: empty key segment in " + path);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

}  // namespace crowdfuse::experiment
