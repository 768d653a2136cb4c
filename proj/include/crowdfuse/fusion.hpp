#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "crowdfuse/crowd.hpp"

// Per-worker weight assignment and weighted-majority aggregation of an
// answer matrix into an N-bit class decision.
namespace crowdfuse::fusion {

// Parameters of the spammer-aware weight rule:
// W_w(n) = [(W-M) mu^n + MN / (2^N (1-m)^N) * [n == N]]^{-1}.
struct AsptParams {
    int W = 0;
    int M = 0;   // total spammers
    int MN = 0;  // Type II spammers
    double mu = 0.75;
    double m = 0.5;
    int N = 1;
};

struct WeightScheme {
    enum class Kind { Aspt, HonestAssumed, ExcludeAllDefinitive, MajorityVote };

    Kind kind = Kind::MajorityVote;
    AsptParams aspt_params;  // Kind::Aspt
    double mu = 0.75;        // HonestAssumed / ExcludeAllDefinitive
    // Count gold columns in a worker's definitive total n (default: the N
    // classification columns only).
    bool count_gold_in_n = false;

    static WeightScheme aspt(const AsptParams& p);
    static WeightScheme honest_assumed(double mu);
    static WeightScheme exclude_all_definitive(double mu);
    static WeightScheme majority_vote();
};

// One weighted vote: +w, -w or 0 per bit.
struct WeightedVote {
    double weight = 0.0;
    double contribution = 0.0;  // signed, zero iff the worker skipped the bit
};

// Per-worker weighted votes on one classification bit; the margin is their
// sum.
std::vector<WeightedVote> weighted_votes(const crowd::AnswerMatrix& answers,
                                         std::span<const double> weights, int bit_index);

struct ClassDecision {
    std::vector<std::uint8_t> word;     // N bits, word[0] most significant
    std::uint64_t class_index = 0;      // binary encoding of word
    std::vector<double> per_bit_margin; // sum of signed contributions per bit
};

// Weight of a worker with n definitive answers under the spammer-aware rule.
// n = 0 is returned for completeness; all-skip workers never contribute.
double aspt_weight(int n, const AsptParams& params);

// Per-worker weights for a whole matrix under a scheme.
std::vector<double> assign_weights(const crowd::AnswerMatrix& answers,
                                   const WeightScheme& scheme);

// Margin sum_w weight_w * (+1 one / -1 zero / 0 skip) for every
// classification bit.
std::vector<double> bit_margins(const crowd::AnswerMatrix& answers,
                                std::span<const double> weights);

// Largest |weight| among the workers who actually voted on each bit. Weights
// of silent workers must not widen the tie window, or they could flip
// decisions they never took part in.
std::vector<double> bit_tie_scales(const crowd::AnswerMatrix& answers,
                                   std::span<const double> weights);

// A margin within 1e-9 * scale of zero counts as a tie (scale 0 means nobody
// voted, which is a tie by definition).
bool is_tie_margin(double margin, double scale);

// Fair coins for tied bits, derived per bit from tie_seed; nullopt where the
// margin decides. Shared by fuse_bit and classify so the two routes agree
// exactly.
std::vector<std::optional<int>> tie_resolution_policy(std::span<const double> margins,
                                                      std::span<const double> scales,
                                                      std::uint64_t tie_seed);

// Decide one bit: sign of the weighted margin, fair coin on a tie.
int fuse_bit(const crowd::AnswerMatrix& answers, std::span<const double> weights,
             int bit_index, std::uint64_t tie_seed);

// Candidate score of every class: each worker adds its weight once per
// definitive bit matching the class, so the argmax decomposes per bit and
// coincides with fuse_bit on every instance.
std::vector<double> candidate_scores(const crowd::AnswerMatrix& answers,
                                     std::span<const double> weights);

// Full N-bit decision (margins, word, class index).
ClassDecision classify(const crowd::AnswerMatrix& answers, std::span<const double> weights,
                       std::uint64_t tie_seed);

}  // namespace crowdfuse::fusion
