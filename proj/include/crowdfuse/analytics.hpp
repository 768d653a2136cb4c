#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "crowdfuse/fusion.hpp"

// Closed-form classification performance: exact per-bit enumeration over
// answer profiles and the large-crowd Gaussian approximation.
namespace crowdfuse::analytics {

// Combinatorial summary of one bit's votes: q[k] counts honest workers with
// |n| = |k - N| definitive answers voting 0 (k < N), skipping (k = N) or
// voting 1 (k > N); the MN Type II spammers split into one/zero voters.
struct AnswerProfile {
    std::vector<int> q;  // size 2N+1, index k corresponds to n = k - N
    int MN_one = 0;
    int MN_zero = 0;
};

struct ProfileContext {
    int W = 0;
    int M0 = 0;
    int MN = 0;
    int N = 1;
    double mu = 0.75;
    double m = 0.5;
};

enum class Hypothesis { H0, H1 };

struct EnumerationTooLarge : std::runtime_error {
    explicit EnumerationTooLarge(std::uint64_t count);
    std::uint64_t profile_count;
};

// Upper-tail standard normal probability via the complementary error
// function.
double q_function(double x);

// log F(G) under H1 (or F'(G) under H0); -inf for zero-probability profiles.
double profile_log_probability(const AnswerProfile& p, const ProfileContext& ctx,
                               Hypothesis hyp);

// log of the number of worker assignments realizing the profile:
// multinomial over honest workers times the spammer split.
double profile_log_multiplicity(const AnswerProfile& p, const ProfileContext& ctx);

// Weighted margin sum_n (q_n - q_{-n}) w(n) + (MN' - MN'') w(N).
// weights_by_n[n] is the weight of a worker with n definitive answers.
double profile_margin(const AnswerProfile& p, std::span<const double> weights_by_n);

// Per-n bit weights implied by a scheme (index 0..N; index 0 unused).
std::vector<double> scheme_bit_weights(const fusion::WeightScheme& scheme,
                                       const ProfileContext& ctx);

struct ExactPcResult {
    double pc = 0.0;
    double per_bit_pc = 0.0;
    std::uint64_t profile_count = 0;
    double normalization_h1 = 0.0;  // sum of count * F over all profiles
    double normalization_h0 = 0.0;
    double tie_mass_h1 = 0.0;       // probability mass of exactly tied profiles
};

// Exact probability of correct classification by streaming enumeration of
// all answer profiles. Throws EnumerationTooLarge when the closed-form
// profile count exceeds profile_cap.
ExactPcResult exact_pc(const ProfileContext& ctx, const fusion::WeightScheme& scheme,
                       std::uint64_t profile_cap = 100'000'000);

// Closed-form profile count: C(W - M + 2N, 2N) * (MN + 1).
std::uint64_t exact_pc_profile_count(const ProfileContext& ctx);

struct AsymptoticMoments {
    // Closed forms exactly as printed (kept for reference; they over-count
    // the n = N weight term).
    double mean_M = 0.0;
    double var_V = 0.0;
    double Z_M = 0.0;  // 2^N (1-m)^N
    // Per-worker moments of the weighted vote T_w under H1, from the exact
    // sums over n; these match simulation.
    double e_h1_honest = 0.0;
    double v_h1_honest = 0.0;
    double e_h1_spammer = 0.0;  // zero by symmetry
    double v_h1_spammer = 0.0;
    // Totals for the bit statistic sum_w T_w: the Gaussian moments used by
    // asymptotic_pc.
    double total_mean = 0.0;  // (W-M) e_h1_honest
    double total_var = 0.0;   // (W-M) v_h1_honest + MN v_h1_spammer
};

AsymptoticMoments asymptotic_moments(int W, int M0, int MN, double mu, double m, int N);

// [Q(-mean/sqrt(var))]^N with the exact Gaussian moments of the bit
// statistic.
double asymptotic_pc(int W, int M0, int MN, double mu, double m, int N);

struct CaseMoments {
    int case_id = 0;  // 1: Type I fraction gamma > 0; 2: Type II fraction eps > 0
    double mean_M = 0.0;
    double var_V = 0.0;
};

// Limiting mean/variance when a fixed fraction of the crowd spams.
// Case 1 (eps = 0): the printed constant-mean form, variance ~ 1/(W(1-gamma)).
// Case 2 (gamma = 0): the printed mean; variance evaluated at MN = eps * W.
CaseMoments spammer_fraction_cases(double gamma, double eps, double mu, double m, int N,
                                   int W);

// [Q(-mean/sqrt(var))]^N for a case-moment pair.
double case_pc(const CaseMoments& cm, int N);

}  // namespace crowdfuse::analytics
