#include "crowdfuse/crowd.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace crowdfuse::crowd {

namespace {

// substream tags
constexpr std::uint64_t kTruthTag = 1;
constexpr std::uint64_t kGoldTag = 2;
constexpr std::uint64_t kWorkerTag = 3;
constexpr std::uint64_t kCellTag = 4;

void check_unit(const ScalarDist& d, const char* what, double lo, double hi) {
    if (!(d.lo >= lo) || !(d.hi <= hi))
        throw std::invalid_argument(std::string(what) + ": support out of range");
}

}  // namespace

ScalarDist ScalarDist::uniform(double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("ScalarDist: lo must not exceed hi");
    return {lo, hi};
}

PTPopulation PTPopulation::fixed(const behavior::PTParams& pt) {
    PTPopulation p;
    p.alpha = ScalarDist::fixed(pt.alpha);
    p.beta = ScalarDist::fixed(pt.beta);
    p.delta = ScalarDist::fixed(pt.delta);
    return p;
}

void CrowdConfig::validate() const {
    if (W < 1) throw std::invalid_argument("CrowdConfig: W must be positive");
    if (M0 < 0 || MN < 0 || M0 + MN > W)
        throw std::invalid_argument("CrowdConfig: need M0, MN >= 0 and M0 + MN <= W");
    if (N < 1) throw std::invalid_argument("CrowdConfig: N must be positive");
    if (G < 0) throw std::invalid_argument("CrowdConfig: G must be nonnegative");
    if (G != payment.gold_count_G)
        throw std::invalid_argument("CrowdConfig: G must match payment.gold_count_G");
    if (const auto* cm = std::get_if<ConfidenceModel>(&model)) {
        if (!(cm->lower >= 0.0) || !(cm->lower < 1.0))
            throw std::invalid_argument("ConfidenceModel: lower must lie in [0, 1)");
        if (!(cm->upper.lo > cm->lower) || !(cm->upper.hi <= 1.0))
            throw std::invalid_argument("ConfidenceModel: upper support must lie in (lower, 1]");
    } else {
        const auto& sc = std::get<SkipCorrectModel>(model);
        check_unit(sc.f_p, "SkipCorrectModel f_p", 0.0, 1.0);
        check_unit(sc.f_r, "SkipCorrectModel f_r", 0.0, 1.0);
    }
    check_unit(pt_population.alpha, "PTPopulation alpha", 1e-12, 2.0);
    check_unit(pt_population.beta, "PTPopulation beta", 1e-12, 10.0);
    check_unit(pt_population.delta, "PTPopulation delta", 1e-12, 2.0);
}

int AnswerMatrix::definitive_count(int w) const {
    int n = 0;
    for (int q = 0; q < columns(); ++q)
        if (at(w, q) != Response::Skip) ++n;
    return n;
}

int AnswerMatrix::definitive_count_classification(int w) const {
    int n = 0;
    for (int q = 0; q < columns(); ++q)
        if (column_kind[q] == ColumnKind::Classification && at(w, q) != Response::Skip) ++n;
    return n;
}

std::vector<int> AnswerMatrix::classification_columns() const {
    std::vector<int> cols;
    cols.reserve(N);
    for (int q = 0; q < columns(); ++q)
        if (column_kind[q] == ColumnKind::Classification) cols.push_back(q);
    return cols;
}

std::vector<std::uint8_t> AnswerMatrix::classification_truth() const {
    std::vector<std::uint8_t> bits;
    bits.reserve(N);
    for (int q = 0; q < columns(); ++q)
        if (column_kind[q] == ColumnKind::Classification) bits.push_back(truth[q]);
    return bits;
}

ScalarDist mu_to_fr(double mu) {
    if (!(mu >= 0.5) || !(mu < 1.0))
        throw std::invalid_argument("mu_to_fr: mu must lie in [1/2, 1)");
    return ScalarDist::uniform(2.0 * mu - 1.0, 1.0);
}

namespace {

// Closed-form (m, mu) for a confidence model at a given behavioral threshold.
CrowdStats confidence_stats_at(const ConfidenceModel& cm, double t_star, MuReading reading) {
    const double L = cm.lower;
    const double ts = std::min(1.0, std::max(L, t_star));
    const double a = cm.upper.lo, b = cm.upper.hi;
    CrowdStats out;
    if (cm.upper.is_fixed()) {
        const double x = a;
        if (x <= ts)
            throw std::domain_error("crowd_stats: confidence model never produces answers");
        out.m = ts > L ? (ts - L) / (x - L) : 0.0;
        out.mu = reading == MuReading::ConditionalCorrectness ? 0.5 * (ts + x)
                                                              : (x - ts) / (x - L);
        return out;
    }
    if (b <= ts)
        throw std::domain_error("crowd_stats: confidence model never produces answers");
    const double xa = std::max(a, ts);  // abilities above xa can answer
    const double len = b - a;
    const double always_skip = xa - a;  // mass of workers with x <= ts
    double tail = 0.0;                  // integral of p(x) over (xa, b)
    if (ts > L) tail = (ts - L) * std::log((b - L) / (xa - L));
    out.m = (always_skip + tail) / len;
    if (reading == MuReading::ConditionalCorrectness) {
        // E[(ts + x)/2] over answering workers x ~ U(xa, b)
        out.mu = 0.5 * (ts + 0.5 * (xa + b));
    } else {
        // E[1 - p(x)] over answering workers
        const double denom = b - xa;
        out.mu = ts > L ? (denom - (ts - L) * std::log((b - L) / (xa - L))) / denom : 1.0;
    }
    return out;
}

// Composite-Simpson average of f over the support of d (or f(point) if fixed).
template <typename F>
double average_over(const ScalarDist& d, F&& f) {
    if (d.is_fixed()) return f(d.lo);
    constexpr int kIntervals = 64;
    const double h = (d.hi - d.lo) / kIntervals;
    double acc = f(d.lo) + f(d.hi);
    for (int i = 1; i < kIntervals; ++i)
        acc += f(d.lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0 / (d.hi - d.lo);
}

}  // namespace

CrowdStats crowd_stats(const CrowdModelSpec& model, double T, const PTPopulation& pt,
                       MuReading reading) {
    if (const auto* sc = std::get_if<SkipCorrectModel>(&model))
        return {sc->f_p.mean(), sc->f_r.mean()};
    const auto& cm = std::get<ConfidenceModel>(model);
    auto stats_for = [&](double al, double be, double de) {
        const double ts = behavior::confidence_threshold(T, behavior::PTParams(al, be, de));
        return confidence_stats_at(cm, ts, reading);
    };
    if (pt.is_fixed()) return stats_for(pt.alpha.lo, pt.beta.lo, pt.delta.lo);
    // average the closed forms over the behavioral-parameter population
    CrowdStats out;
    out.m = average_over(pt.alpha, [&](double al) {
        return average_over(pt.beta, [&](double be) {
            return average_over(pt.delta,
                                [&](double de) { return stats_for(al, be, de).m; });
        });
    });
    out.mu = average_over(pt.alpha, [&](double al) {
        return average_over(pt.beta, [&](double be) {
            return average_over(pt.delta,
                                [&](double de) { return stats_for(al, be, de).mu; });
        });
    });
    return out;
}

CrowdInstance generate_crowd(const CrowdConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    CrowdInstance inst;
    inst.seed = seed;
    inst.workers.resize(cfg.W);
    const int honest = cfg.honest_count();
    for (int w = 0; w < cfg.W; ++w) {
        WorkerProfile& wp = inst.workers[w];
        if (w >= honest) {
            wp.kind = w < honest + cfg.M0 ? WorkerKind::TypeI : WorkerKind::TypeII;
            continue;
        }
        wp.kind = WorkerKind::Honest;
        rng::Stream ws(rng::derive(seed, kWorkerTag, static_cast<std::uint64_t>(w)));
        if (const auto* sc = std::get_if<SkipCorrectModel>(&cfg.model)) {
            wp.p = sc->f_p.sample(ws);
            wp.r = sc->f_r.sample(ws);
        } else {
            wp.upper = std::get<ConfidenceModel>(cfg.model).upper.sample(ws);
        }
        wp.alpha = cfg.pt_population.alpha.sample(ws);
        wp.beta = cfg.pt_population.beta.sample(ws);
        wp.delta = cfg.pt_population.delta.sample(ws);
        wp.t_star = behavior::confidence_threshold(
            cfg.payment.threshold_T, behavior::PTParams(wp.alpha, wp.beta, wp.delta));
    }
    return inst;
}

AnswerMatrix run_session(const CrowdInstance& crowd, const CrowdConfig& cfg,
                         std::uint64_t seed) {
    cfg.validate();
    if (static_cast<int>(crowd.workers.size()) != cfg.W)
        throw std::invalid_argument("run_session: crowd size does not match config");
    const int Q = cfg.N + cfg.G;
    AnswerMatrix m;
    m.W = cfg.W;
    m.N = cfg.N;
    m.G = cfg.G;
    m.seed = seed;
    m.config_digest = digest_config(cfg);
    m.truth.resize(Q);
    for (int q = 0; q < Q; ++q)
        m.truth[q] = static_cast<std::uint8_t>(
            rng::derive(seed, kTruthTag, static_cast<std::uint64_t>(q)) >> 63);

    // gold columns sit at seed-derived positions unknown to the workers
    m.column_kind.assign(Q, ColumnKind::Classification);
    if (cfg.G > 0) {
        std::vector<int> perm(Q);
        std::iota(perm.begin(), perm.end(), 0);
        rng::Stream gs(rng::derive(seed, kGoldTag));
        for (int i = 0; i < cfg.G; ++i) {
            const int j = i + static_cast<int>(gs.below(static_cast<std::uint32_t>(Q - i)));
            std::swap(perm[i], perm[j]);
            m.column_kind[perm[i]] = ColumnKind::Gold;
        }
    }

    m.worker_kind.resize(cfg.W);
    m.responses.resize(static_cast<std::size_t>(cfg.W) * Q);
    const auto* sc = std::get_if<SkipCorrectModel>(&cfg.model);
    const auto* cm = std::get_if<ConfidenceModel>(&cfg.model);
    for (int w = 0; w < cfg.W; ++w) {
        const WorkerProfile& wp = crowd.workers[w];
        m.worker_kind[w] = wp.kind;
        for (int q = 0; q < Q; ++q) {
            rng::Stream cs(rng::derive(seed, kCellTag, static_cast<std::uint64_t>(w),
                                       static_cast<std::uint64_t>(q)));
            Response resp = Response::Skip;
            switch (wp.kind) {
                case WorkerKind::TypeI:
                    resp = cfg.force_answer ? (cs.bit() ? Response::One : Response::Zero)
                                            : Response::Skip;
                    break;
                case WorkerKind::TypeII:
                    resp = cs.bit() ? Response::One : Response::Zero;
                    break;
                case WorkerKind::Honest: {
                    bool correct = false;
                    bool answers = false;
                    if (sc) {
                        double p = wp.p, r = wp.r;
                        if (cfg.redraw_per_question) {
                            p = sc->f_p.sample(cs);
                            r = sc->f_r.sample(cs);
                        }
                        const bool would_skip = cs.bernoulli(p);
                        if (cfg.force_answer) {
                            answers = true;
                            correct = cs.bernoulli(would_skip ? 0.5 : r);
                        } else if (!would_skip) {
                            answers = true;
                            correct = cs.bernoulli(r);
                        }
                    } else {
                        const double t = cs.uniform(cm->lower, wp.upper);
                        if (cfg.force_answer ||
                            behavior::honest_decision_at_threshold(t, wp.t_star) ==
                                behavior::Decision::Answer) {
                            answers = true;
                            correct = cs.bernoulli(t);
                        }
                    }
                    if (answers) {
                        const bool one = correct ? m.truth[q] : !m.truth[q];
                        resp = one ? Response::One : Response::Zero;
                    }
                    break;
                }
            }
            m.responses[static_cast<std::size_t>(w) * Q + q] = resp;
        }
    }
    return m;
}

std::string digest_config(const CrowdConfig& cfg) {
    char buf[512];
    const auto* sc = std::get_if<SkipCorrectModel>(&cfg.model);
    const auto* cm = std::get_if<ConfidenceModel>(&cfg.model);
    int n = std::snprintf(
        buf, sizeof buf,
        "W=%d;M0=%d;MN=%d;N=%d;G=%d;T=%.17g;mumax=%.17g;mumin=%.17g;"
        "model=%s(%.17g,%.17g,%.17g,%.17g);pt=%.17g,%.17g,%.17g,%.17g,%.17g,%.17g;"
        "redraw=%d;force=%d",
        cfg.W, cfg.M0, cfg.MN, cfg.N, cfg.G, cfg.payment.threshold_T, cfg.payment.mu_max,
        cfg.payment.mu_min, sc ? "sc" : "conf", sc ? sc->f_p.lo : cm->lower,
        sc ? sc->f_p.hi : cm->lower, sc ? sc->f_r.lo : cm->upper.lo,
        sc ? sc->f_r.hi : cm->upper.hi, cfg.pt_population.alpha.lo, cfg.pt_population.alpha.hi,
        cfg.pt_population.beta.lo, cfg.pt_population.beta.hi, cfg.pt_population.delta.lo,
        cfg.pt_population.delta.hi, cfg.redraw_per_question ? 1 : 0, cfg.force_answer ? 1 : 0);
    // FNV-1a over the canonical rendering
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(buf[i]);
        h *= 0x100000001b3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace crowdfuse::crowd
