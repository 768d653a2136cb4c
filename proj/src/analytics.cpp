#include "crowdfuse/analytics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace crowdfuse::analytics {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTieRelTol = 1e-12;
constexpr double kPruneLog = -69.0;  // e^-69 ~ 1e-30, far below any tolerance

double binom_small(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// log(x) with log(0) = -inf and no FP exception noise
double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

struct Kahan {
    double sum = 0.0;
    double c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

void validate_ctx(const ProfileContext& ctx) {
    if (ctx.W < 1 || ctx.M0 < 0 || ctx.MN < 0 || ctx.M0 + ctx.MN > ctx.W)
        throw std::invalid_argument("ProfileContext: bad worker counts");
    if (ctx.N < 1) throw std::invalid_argument("ProfileContext: N must be positive");
    if (!(ctx.mu >= 0.0) || !(ctx.mu <= 1.0) || !(ctx.m >= 0.0) || !(ctx.m <= 1.0))
        throw std::invalid_argument("ProfileContext: mu, m must lie in [0, 1]");
}

void validate_profile(const AnswerProfile& p, const ProfileContext& ctx) {
    if (static_cast<int>(p.q.size()) != 2 * ctx.N + 1)
        throw std::invalid_argument("AnswerProfile: q must have 2N+1 entries");
    int total = 0;
    for (int v : p.q) {
        if (v < 0) throw std::invalid_argument("AnswerProfile: negative count");
        total += v;
    }
    if (total != ctx.W - ctx.M0 - ctx.MN)
        throw std::invalid_argument("AnswerProfile: honest counts must sum to W - M");
    if (p.MN_one < 0 || p.MN_zero < 0 || p.MN_one + p.MN_zero != ctx.MN)
        throw std::invalid_argument("AnswerProfile: spammer split must sum to MN");
}

}  // namespace

EnumerationTooLarge::EnumerationTooLarge(std::uint64_t count)
    : std::runtime_error("exact_pc: enumeration of " + std::to_string(count) +
                         " profiles exceeds the configured cap"),
      profile_count(count) {}

double q_function(double x) {
    if (std::isnan(x)) throw std::domain_error("q_function: x must not be NaN");
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double profile_log_probability(const AnswerProfile& p, const ProfileContext& ctx,
                               Hypothesis hyp) {
    validate_ctx(ctx);
    validate_profile(p, ctx);
    const int N = ctx.N;
    double lp = 0.0;
    if (p.q[N] > 0) lp += p.q[N] * safe_log(ctx.m);
    lp += ctx.MN * std::log(0.5);
    for (int n = 1; n <= N; ++n) {
        const int q_pos = p.q[N + n];
        const int q_neg = p.q[N - n];
        if (q_pos + q_neg == 0) continue;
        const double phi = binom_small(N - 1, n - 1) * std::pow(1.0 - ctx.m, n) *
                           std::pow(ctx.m, N - n);
        lp += (q_pos + q_neg) * safe_log(phi);
        const double p_one = hyp == Hypothesis::H1 ? ctx.mu : 1.0 - ctx.mu;
        if (q_pos > 0) lp += q_pos * safe_log(p_one);
        if (q_neg > 0) lp += q_neg * safe_log(1.0 - p_one);
        if (lp == kNegInf) return kNegInf;
    }
    return lp;
}

double profile_log_multiplicity(const AnswerProfile& p, const ProfileContext& ctx) {
    validate_ctx(ctx);
    validate_profile(p, ctx);
    const int H = ctx.W - ctx.M0 - ctx.MN;
    double lc = std::lgamma(H + 1.0);
    for (int v : p.q) lc -= std::lgamma(v + 1.0);
    lc += std::lgamma(ctx.MN + 1.0) - std::lgamma(p.MN_one + 1.0) -
          std::lgamma(p.MN_zero + 1.0);
    return lc;
}

double profile_margin(const AnswerProfile& p, std::span<const double> weights_by_n) {
    const int N = (static_cast<int>(p.q.size()) - 1) / 2;
    if (static_cast<int>(weights_by_n.size()) != N + 1)
        throw std::invalid_argument("profile_margin: need weights for n = 0..N");
    double s = 0.0;
    for (int n = 1; n <= N; ++n)
        s += (p.q[N + n] - p.q[N - n]) * weights_by_n[n];
    s += (p.MN_one - p.MN_zero) * weights_by_n[N];
    return s;
}

std::vector<double> scheme_bit_weights(const fusion::WeightScheme& scheme,
                                       const ProfileContext& ctx) {
    validate_ctx(ctx);
    std::vector<double> w(ctx.N + 1, 1.0);
    switch (scheme.kind) {
        case fusion::WeightScheme::Kind::Aspt: {
            const fusion::AsptParams p{ctx.W, ctx.M0 + ctx.MN, ctx.MN, ctx.mu, ctx.m, ctx.N};
            for (int n = 0; n <= ctx.N; ++n) w[n] = fusion::aspt_weight(n, p);
            break;
        }
        case fusion::WeightScheme::Kind::HonestAssumed:
            for (int n = 0; n <= ctx.N; ++n) w[n] = std::pow(ctx.mu, -n);
            break;
        case fusion::WeightScheme::Kind::ExcludeAllDefinitive:
            for (int n = 0; n <= ctx.N; ++n) w[n] = std::pow(ctx.mu, -n);
            w[ctx.N] = 0.0;
            break;
        case fusion::WeightScheme::Kind::MajorityVote:
            break;
    }
    return w;
}

std::uint64_t exact_pc_profile_count(const ProfileContext& ctx) {
    validate_ctx(ctx);
    const int H = ctx.W - ctx.M0 - ctx.MN;
    // C(H + 2N, 2N), guarded against overflow
    long double c = 1.0L;
    for (int i = 1; i <= 2 * ctx.N; ++i) c = c * (H + i) / i;
    const long double total = c * (ctx.MN + 1);
    if (total > static_cast<long double>(std::numeric_limits<std::uint64_t>::max()))
        return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(total + 0.5L);
}

ExactPcResult exact_pc(const ProfileContext& ctx, const fusion::WeightScheme& scheme,
                       std::uint64_t profile_cap) {
    validate_ctx(ctx);
    const std::uint64_t expected = exact_pc_profile_count(ctx);
    if (expected > profile_cap) throw EnumerationTooLarge(expected);

    const int N = ctx.N;
    const int H = ctx.W - ctx.M0 - ctx.MN;
    const int MN = ctx.MN;
    const int slots = 2 * N + 1;
    const auto w = scheme_bit_weights(scheme, ctx);

    // per-slot log-probability of one worker landing there, under H1 and H0
    std::vector<double> lc1(slots), lc0(slots);
    for (int n = 1; n <= N; ++n) {
        const double lphi =
            safe_log(binom_small(N - 1, n - 1) * std::pow(1.0 - ctx.m, n) *
                     std::pow(ctx.m, N - n));
        lc1[N + n] = lphi + safe_log(ctx.mu);
        lc1[N - n] = lphi + safe_log(1.0 - ctx.mu);
        lc0[N + n] = lphi + safe_log(1.0 - ctx.mu);
        lc0[N - n] = lphi + safe_log(ctx.mu);
    }
    lc1[N] = safe_log(ctx.m);
    lc0[N] = lc1[N];

    std::vector<double> lgam(std::max(H, MN) + 2);
    for (std::size_t i = 0; i < lgam.size(); ++i) lgam[i] = std::lgamma(i + 1.0);

    // spammer split factor: log[ MN!/(mn1! mn2!) (1/2)^MN ]
    std::vector<double> lsplit(MN + 1);
    for (int mn1 = 0; mn1 <= MN; ++mn1)
        lsplit[mn1] = lgam[MN] - lgam[mn1] - lgam[MN - mn1] + MN * std::log(0.5);
    double max_lsplit = kNegInf;
    for (double v : lsplit) max_lsplit = std::max(max_lsplit, v);

    const double lgH = lgam[H];
    Kahan sum_s, sum_tie, norm1, norm0, tie1;
    std::uint64_t count = 0;
    std::vector<int> q(slots, 0);

    // lexicographic recursion over compositions of H into the 2N+1 slots
    auto recurse = [&](auto&& self, int slot, int remaining, double l1, double l0) -> void {
        if (std::max(l1, l0) + lgH + max_lsplit < kPruneLog) {
            // the whole subtree is numerically negligible; count it and move on
            long double c = 1.0L;
            for (int i = 1; i <= slots - slot - 1; ++i) c = c * (remaining + i) / i;
            count += static_cast<std::uint64_t>(c + 0.5L) * (MN + 1);
            return;
        }
        if (slot == slots - 1) {
            q[slot] = remaining;
            const double f1 = l1 + remaining * lc1[slot] - lgam[remaining];
            const double f0 = l0 + remaining * lc0[slot] - lgam[remaining];
            double margin_h = 0.0, scale_h = 0.0;
            for (int n = 1; n <= N; ++n) {
                const double d = (q[N + n] - q[N - n]) * w[n];
                margin_h += d;
                scale_h += std::abs(d);
            }
            for (int mn1 = 0; mn1 <= MN; ++mn1) {
                ++count;
                const double le1 = lgH + f1 + lsplit[mn1];
                const double le0 = lgH + f0 + lsplit[mn1];
                const double e1 = le1 > kPruneLog ? std::exp(le1) : 0.0;
                const double e0 = le0 > kPruneLog ? std::exp(le0) : 0.0;
                if (e1 == 0.0 && e0 == 0.0) continue;
                norm1.add(e1);
                norm0.add(e0);
                const double spam = (2 * mn1 - MN) * w[N];
                const double margin = margin_h + spam;
                const double scale = scale_h + std::abs(spam);
                if (scale == 0.0 || std::abs(margin) <= kTieRelTol * scale) {
                    sum_tie.add(e1 - e0);
                    tie1.add(e1);
                } else if (margin > 0.0) {
                    sum_s.add(e1 - e0);
                }
            }
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            q[slot] = v;
            const double n1 = v == 0 ? l1 : l1 + v * lc1[slot] - lgam[v];
            const double n0 = v == 0 ? l0 : l0 + v * lc0[slot] - lgam[v];
            self(self, slot + 1, remaining - v, n1, n0);
        }
        q[slot] = 0;
    };
    recurse(recurse, 0, H, 0.0, 0.0);
    if (count != expected)
        throw std::logic_error("exact_pc: enumerated profile count disagrees with the "
                               "closed form");

    ExactPcResult res;
    res.profile_count = count;
    res.normalization_h1 = norm1.sum;
    res.normalization_h0 = norm0.sum;
    res.tie_mass_h1 = tie1.sum;
    res.per_bit_pc = 0.5 + 0.5 * sum_s.sum + 0.25 * sum_tie.sum;
    res.per_bit_pc = std::min(1.0, std::max(0.0, res.per_bit_pc));
    res.pc = std::pow(res.per_bit_pc, N);
    return res;
}

AsymptoticMoments asymptotic_moments(int W, int M0, int MN, double mu, double m, int N) {
    if (W < 1 || M0 < 0 || MN < 0 || M0 + MN >= W)
        throw std::domain_error("asymptotic_moments: need W > M0 + MN >= 0");
    if (!(m > 0.0) || !(m < 1.0))
        throw std::domain_error("asymptotic_moments: m must lie in (0, 1)");
    if (!(mu >= 0.5) || !(mu <= 1.0))
        throw std::domain_error("asymptotic_moments: mu must lie in [1/2, 1]");
    if (N < 1) throw std::domain_error("asymptotic_moments: N must be positive");

    const int M = M0 + MN;
    const fusion::AsptParams params{W, M, MN, mu, m, N};
    AsymptoticMoments out;
    out.Z_M = std::pow(2.0 * (1.0 - m), N);

    double e = 0.0, e2 = 0.0;
    for (int n = 1; n <= N; ++n) {
        const double wn = fusion::aspt_weight(n, params);
        const double phi = binom_small(N - 1, n - 1) * std::pow(1.0 - m, n) *
                           std::pow(m, N - n);
        e += wn * phi;
        e2 += wn * wn * phi;
    }
    out.e_h1_honest = (2.0 * mu - 1.0) * e;
    out.v_h1_honest = e2 - out.e_h1_honest * out.e_h1_honest;
    out.e_h1_spammer = 0.0;
    const double wN = fusion::aspt_weight(N, params);
    out.v_h1_spammer = wN * wN;
    out.total_mean = (W - M) * out.e_h1_honest;
    out.total_var = (W - M) * out.v_h1_honest + MN * out.v_h1_spammer;

    // closed forms as printed
    const double x = (1.0 - m) / mu;
    const double c1 = (2.0 * mu - 1.0) * x * std::pow(x + m, N - 1);
    const double zden = (W - M) * std::pow(mu, N) * out.Z_M + MN;
    out.mean_M = c1 + (W - M) * (2.0 * mu - 1.0) * std::pow(1.0 - m, N) * out.Z_M / zden;
    const double y = (1.0 - m) / (mu * mu);
    out.var_V = y / (W - M) * std::pow(y + m, N - 1) +
                ((W - M) * std::pow(1.0 - m, N) + MN) * out.Z_M * out.Z_M / (zden * zden) -
                out.mean_M * out.mean_M / (W - M);
    return out;
}

double asymptotic_pc(int W, int M0, int MN, double mu, double m, int N) {
    const auto mom = asymptotic_moments(W, M0, MN, mu, m, N);
    if (!(mom.total_var > 0.0))
        throw std::domain_error("asymptotic_pc: nonpositive variance");
    return std::pow(q_function(-mom.total_mean / std::sqrt(mom.total_var)), N);
}

CaseMoments spammer_fraction_cases(double gamma, double eps, double mu, double m, int N,
                                   int W) {
    if (!(gamma >= 0.0) || gamma >= 1.0 || !(eps >= 0.0) || eps >= 1.0)
        throw std::invalid_argument("spammer_fraction_cases: fractions must lie in [0, 1)");
    if (gamma > 0.0 && eps > 0.0)
        throw std::invalid_argument(
            "spammer_fraction_cases: the two cases cover one positive fraction at a time");
    if (W < 1 || N < 1 || !(m > 0.0) || !(m < 1.0) || !(mu >= 0.5) || !(mu <= 1.0))
        throw std::invalid_argument("spammer_fraction_cases: bad parameters");

    const double x = (1.0 - m) / mu;
    const double c1 = (2.0 * mu - 1.0) * x * std::pow(x + m, N - 1);
    const double y = (1.0 - m) / (mu * mu);
    CaseMoments out;
    if (eps == 0.0) {
        out.case_id = 1;
        out.mean_M = c1 + (2.0 * mu - 1.0) * std::pow(x, N);
        out.var_V = (y * std::pow(y + m, N - 1) + std::pow(x, N) -
                     out.mean_M * out.mean_M) /
                    (W * (1.0 - gamma));
    } else {
        out.case_id = 2;
        const double Z = std::pow(2.0 * (1.0 - m), N);
        out.mean_M = c1 + (2.0 * mu - 1.0) * std::pow(1.0 - m, N) * Z /
                              (std::pow(mu, N) * Z + eps / (1.0 - eps));
        const double honest = W * (1.0 - eps);
        const double zden = honest * std::pow(mu, N) * Z + eps * W;
        out.var_V = y / honest * std::pow(y + m, N - 1) +
                    (honest * std::pow(1.0 - m, N) + eps * W) * Z * Z / (zden * zden) -
                    out.mean_M * out.mean_M / honest;
    }
    return out;
}

double case_pc(const CaseMoments& cm, int N) {
    if (!(cm.var_V > 0.0)) throw std::domain_error("case_pc: nonpositive variance");
    return std::pow(q_function(-cm.mean_M / std::sqrt(cm.var_V)), N);
}

}  // namespace crowdfuse::analytics
