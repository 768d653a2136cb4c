#include "crowdfuse/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crowdfuse::inference {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_binom(int n, int k) {
    if (k < 0 || n < 0 || k > n) return kNegInf;
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// c * log(p) with the 0 * log(0) = 0 convention
double xlogp(int c, double p) {
    if (c == 0) return 0.0;
    if (!(p > 0.0)) return kNegInf;
    return c * std::log(p);
}

std::vector<int> non_extreme_workers(const crowd::AnswerMatrix& a) {
    std::vector<int> idx;
    const int Q = a.columns();
    for (int w = 0; w < a.W; ++w) {
        const int d = a.definitive_count(w);
        if (d > 0 && d < Q) idx.push_back(w);
    }
    return idx;
}

double clamp_mu(double mu) { return std::min(1.0, std::max(0.5, mu)); }

// Eq-(9) support needs m strictly inside (0, 1).
double clamp_m_for_mle(double m) { return std::min(1.0 - 1e-9, std::max(1e-9, m)); }

struct PooledStats {
    double m_hat = 0.0;
    double mu_hat = 0.0;
    std::vector<ExtremeCounts> extremes;
};

double estimate_mu_over(const std::vector<const crowd::AnswerMatrix*>& mats,
                        MuMethod method) {
    long correct = 0, total = 0;
    for (const auto* a : mats) {
        const auto nonex = non_extreme_workers(*a);
        if (method == MuMethod::GoldTraining) {
            if (a->G < 1)
                throw EstimationError("estimate_mu: GoldTraining requires G >= 1");
            for (int w : nonex) {
                for (int q = 0; q < a->columns(); ++q) {
                    if (a->column_kind[q] != crowd::ColumnKind::Gold) continue;
                    const auto r = a->at(w, q);
                    if (r == crowd::Response::Skip) continue;
                    ++total;
                    const bool one = r == crowd::Response::One;
                    correct += one == static_cast<bool>(a->truth[q]);
                }
            }
        } else {
            if (static_cast<int>(nonex.size()) < 3)
                throw EstimationError("estimate_mu: MajorityVote needs >= 3 non-extreme workers");
            for (int q = 0; q < a->columns(); ++q) {
                if (a->column_kind[q] != crowd::ColumnKind::Classification) continue;
                int ones = 0, zeros = 0;
                for (int w : nonex) {
                    const auto r = a->at(w, q);
                    if (r == crowd::Response::One) ++ones;
                    else if (r == crowd::Response::Zero) ++zeros;
                }
                if (ones == zeros) continue;  // no majority, drop the column
                const bool pseudo = ones > zeros;
                for (int w : nonex) {
                    const auto r = a->at(w, q);
                    if (r == crowd::Response::Skip) continue;
                    ++total;
                    correct += (r == crowd::Response::One) == pseudo;
                }
            }
        }
    }
    if (total == 0) throw EstimationError("estimate_mu: no definitive answers in scope");
    return clamp_mu(static_cast<double>(correct) / static_cast<double>(total));
}

double estimate_m_over(const std::vector<const crowd::AnswerMatrix*>& mats) {
    long skipped = 0, cells = 0;
    for (const auto* a : mats) {
        const auto nonex = non_extreme_workers(*a);
        for (int w : nonex) {
            for (int q = 0; q < a->columns(); ++q) {
                ++cells;
                skipped += a->at(w, q) == crowd::Response::Skip;
            }
        }
    }
    if (cells == 0) throw EstimationError("estimate_m: all workers are extreme");
    return static_cast<double>(skipped) / static_cast<double>(cells);
}

}  // namespace

ExtremeCounts extreme_counts(const crowd::AnswerMatrix& answers) {
    ExtremeCounts c;
    const int Q = answers.columns();
    for (int w = 0; w < answers.W; ++w) {
        const int d = answers.definitive_count(w);
        if (d == Q) ++c.all_definitive;
        else if (d == 0) ++c.all_skip;
    }
    return c;
}

double estimate_m(const crowd::AnswerMatrix& answers) {
    return estimate_m_over({&answers});
}

double estimate_mu(const crowd::AnswerMatrix& answers, MuMethod method) {
    return estimate_mu_over({&answers}, method);
}

double spammer_count_log_likelihood(int w_all, int w_none, int MN, int M0, int W,
                                    double m_hat, int N, int G) {
    if (W < 0 || N < 1 || G < 0)
        throw std::invalid_argument("spammer_count_log_likelihood: bad W/N/G");
    if (!(m_hat > 0.0) || !(m_hat < 1.0))
        throw std::domain_error("spammer_count_log_likelihood: m_hat must lie in (0, 1)");
    if (M0 < 0 || MN < 0) return kNegInf;
    if (M0 > w_none || MN > w_all || M0 + MN > W) return kNegInf;
    const int Q = N + G;
    const double ps = std::pow(m_hat, Q);        // honest all-skip probability
    const double pd = std::pow(1.0 - m_hat, Q);  // honest all-definitive probability
    const int a = w_none - M0;                   // honest workers skipping everything
    const int b = w_all - MN;                    // honest workers definitive everywhere
    const double t1 = log_binom(W - M0 - MN, a);
    const double t2 = log_binom(W - w_none - MN, b);
    if (t1 == kNegInf || t2 == kNegInf) return kNegInf;
    return t1 + xlogp(a, ps) + xlogp(W - w_none - MN, 1.0 - ps) + t2 +
           xlogp(Q * b, 1.0 - m_hat) + xlogp(W - w_all - w_none, 1.0 - pd);
}

std::pair<std::pair<int, int>, double> estimate_spammer_counts(int w_all, int w_none,
                                                               int W, double m_hat,
                                                               int N, int G) {
    std::pair<int, int> best{0, 0};
    double best_ll = kNegInf;
    for (int M0 = 0; M0 <= w_none; ++M0) {
        for (int MN = 0; MN <= w_all; ++MN) {
            if (M0 + MN > W) continue;
            const double ll = spammer_count_log_likelihood(w_all, w_none, MN, M0, W,
                                                           m_hat, N, G);
            if (ll == kNegInf) continue;
            const bool better = ll > best_ll + 1e-12;
            const bool tie = std::abs(ll - best_ll) <= 1e-12 &&
                             std::make_pair(M0 + MN, M0) <
                                 std::make_pair(best.first + best.second, best.first);
            if (better || tie || best_ll == kNegInf) {
                best_ll = ll;
                best = {M0, MN};
            }
        }
    }
    return {best, best_ll};
}

CrowdEstimates estimate_crowd(const crowd::AnswerMatrix& answers, MuMethod method) {
    return estimate_crowd_pooled({&answers, 1}, method);
}

CrowdEstimates estimate_crowd_pooled(std::span<const crowd::AnswerMatrix> sessions,
                                     MuMethod method) {
    if (sessions.empty()) throw std::invalid_argument("estimate_crowd_pooled: no sessions");
    std::vector<const crowd::AnswerMatrix*> mats;
    mats.reserve(sessions.size());
    for (const auto& s : sessions) mats.push_back(&s);
    const int W = mats.front()->W;
    const int N = mats.front()->N;
    const int G = mats.front()->G;
    for (const auto* a : mats)
        if (a->W != W || a->N != N || a->G != G)
            throw std::invalid_argument("estimate_crowd_pooled: sessions disagree on shape");

    CrowdEstimates est;
    est.method_mu = method;
    est.m_hat = estimate_m_over(mats);
    est.mu_hat = estimate_mu_over(mats, method);

    const double mc = clamp_m_for_mle(est.m_hat);
    int max_m0 = W, max_mn = W;
    std::vector<ExtremeCounts> ext;
    ext.reserve(mats.size());
    for (const auto* a : mats) {
        ext.push_back(extreme_counts(*a));
        max_m0 = std::min(max_m0, ext.back().all_skip);
        max_mn = std::min(max_mn, ext.back().all_definitive);
    }
    std::pair<int, int> best{0, 0};
    double best_ll = kNegInf;
    for (int M0 = 0; M0 <= max_m0; ++M0) {
        for (int MN = 0; MN <= max_mn; ++MN) {
            if (M0 + MN > W) continue;
            double ll = 0.0;
            for (const auto& e : ext) {
                ll += spammer_count_log_likelihood(e.all_definitive, e.all_skip, MN, M0,
                                                   W, mc, N, G);
                if (ll == kNegInf) break;
            }
            if (ll == kNegInf) continue;
            const bool better = ll > best_ll + 1e-12;
            const bool tie = std::abs(ll - best_ll) <= 1e-12 &&
                             std::make_pair(M0 + MN, M0) <
                                 std::make_pair(best.first + best.second, best.first);
            if (better || tie || best_ll == kNegInf) {
                best_ll = ll;
                best = {M0, MN};
            }
        }
    }
    est.M0_hat = best.first;
    est.MN_hat = best.second;
    est.log_likelihood = best_ll;
    return est;
}

std::vector<SurfacePoint> likelihood_surface(int w_all, int w_none, int W, double m_hat,
                                             int N, int G) {
    std::vector<SurfacePoint> pts;
    pts.reserve(static_cast<std::size_t>(w_none + 1) * (w_all + 1));
    for (int M0 = 0; M0 <= w_none; ++M0)
        for (int MN = 0; MN <= w_all; ++MN)
            pts.push_back({M0, MN,
                           spammer_count_log_likelihood(w_all, w_none, MN, M0, W,
                                                        clamp_m_for_mle(m_hat), N, G)});
    return pts;
}

}  // namespace crowdfuse::inference
