#include "crowdfuse/fusion.hpp"

#include <cmath>
#include <stdexcept>

namespace crowdfuse::fusion {

namespace {

constexpr std::uint64_t kTieTag = 11;

int coin_for_bit(std::uint64_t tie_seed, int bit) {
    return static_cast<int>(rng::derive(tie_seed, kTieTag, static_cast<std::uint64_t>(bit)) >> 63);
}

}  // namespace

WeightScheme WeightScheme::aspt(const AsptParams& p) {
    WeightScheme s;
    s.kind = Kind::Aspt;
    s.aspt_params = p;
    return s;
}

WeightScheme WeightScheme::honest_assumed(double mu) {
    WeightScheme s;
    s.kind = Kind::HonestAssumed;
    s.mu = mu;
    return s;
}

WeightScheme WeightScheme::exclude_all_definitive(double mu) {
    WeightScheme s;
    s.kind = Kind::ExcludeAllDefinitive;
    s.mu = mu;
    return s;
}

WeightScheme WeightScheme::majority_vote() { return {}; }

double aspt_weight(int n, const AsptParams& p) {
    if (n < 0 || n > p.N) throw std::invalid_argument("aspt_weight: n out of [0, N]");
    if (p.MN < 0 || p.MN > p.M || p.M > p.W)
        throw std::invalid_argument("aspt_weight: need 0 <= MN <= M <= W");
    if (!(p.mu >= 0.5) || !(p.mu <= 1.0))
        throw std::invalid_argument("aspt_weight: mu must lie in [1/2, 1]");
    if (!(p.m >= 0.0) || !(p.m <= 1.0))
        throw std::invalid_argument("aspt_weight: m must lie in [0, 1]");
    double den = (p.W - p.M) * std::pow(p.mu, n);
    if (n == p.N && p.MN > 0) {
        const double pop = std::pow(2.0 * (1.0 - p.m), p.N);  // 2^N (1-m)^N
        if (!(pop > 0.0))
            throw std::domain_error("aspt_weight: m = 1 with MN > 0 has no finite weight");
        den += p.MN / pop;
    }
    if (!(den > 0.0) || !std::isfinite(den))
        throw std::domain_error("aspt_weight: degenerate denominator");
    return 1.0 / den;
}

std::vector<double> assign_weights(const crowd::AnswerMatrix& answers,
                                   const WeightScheme& scheme) {
    const int n_cols = scheme.count_gold_in_n ? answers.columns() : answers.N;
    std::vector<double> weights(answers.W, 1.0);
    if (scheme.kind == WeightScheme::Kind::MajorityVote) return weights;
    for (int w = 0; w < answers.W; ++w) {
        const int n = scheme.count_gold_in_n ? answers.definitive_count(w)
                                             : answers.definitive_count_classification(w);
        switch (scheme.kind) {
            case WeightScheme::Kind::Aspt: {
                AsptParams p = scheme.aspt_params;
                p.N = n_cols;
                weights[w] = aspt_weight(n, p);
                break;
            }
            case WeightScheme::Kind::HonestAssumed:
                weights[w] = std::pow(scheme.mu, -n);
                break;
            case WeightScheme::Kind::ExcludeAllDefinitive:
                weights[w] = n == n_cols ? 0.0 : std::pow(scheme.mu, -n);
                break;
            case WeightScheme::Kind::MajorityVote:
                break;
        }
    }
    return weights;
}

std::vector<WeightedVote> weighted_votes(const crowd::AnswerMatrix& answers,
                                         std::span<const double> weights, int bit_index) {
    if (bit_index < 0 || bit_index >= answers.N)
        throw std::invalid_argument("weighted_votes: bit index out of range");
    const auto cols = answers.classification_columns();
    std::vector<WeightedVote> votes(answers.W);
    for (int w = 0; w < answers.W; ++w) {
        votes[w].weight = weights[w];
        switch (answers.at(w, cols[bit_index])) {
            case crowd::Response::One: votes[w].contribution = weights[w]; break;
            case crowd::Response::Zero: votes[w].contribution = -weights[w]; break;
            case crowd::Response::Skip: votes[w].contribution = 0.0; break;
        }
    }
    return votes;
}

std::vector<double> bit_margins(const crowd::AnswerMatrix& answers,
                                std::span<const double> weights) {
    if (static_cast<int>(weights.size()) != answers.W)
        throw std::invalid_argument("bit_margins: weight vector size mismatch");
    const auto cols = answers.classification_columns();
    std::vector<double> margins(cols.size(), 0.0);
    for (int w = 0; w < answers.W; ++w) {
        for (std::size_t b = 0; b < cols.size(); ++b) {
            switch (answers.at(w, cols[b])) {
                case crowd::Response::One: margins[b] += weights[w]; break;
                case crowd::Response::Zero: margins[b] -= weights[w]; break;
                case crowd::Response::Skip: break;
            }
        }
    }
    return margins;
}

std::vector<double> bit_tie_scales(const crowd::AnswerMatrix& answers,
                                   std::span<const double> weights) {
    if (static_cast<int>(weights.size()) != answers.W)
        throw std::invalid_argument("bit_tie_scales: weight vector size mismatch");
    const auto cols = answers.classification_columns();
    std::vector<double> scales(cols.size(), 0.0);
    for (int w = 0; w < answers.W; ++w)
        for (std::size_t b = 0; b < cols.size(); ++b)
            if (answers.at(w, cols[b]) != crowd::Response::Skip)
                scales[b] = std::max(scales[b], std::abs(weights[w]));
    return scales;
}

bool is_tie_margin(double margin, double scale) {
    return std::abs(margin) <= 1e-9 * scale;
}

std::vector<std::optional<int>> tie_resolution_policy(std::span<const double> margins,
                                                      std::span<const double> scales,
                                                      std::uint64_t tie_seed) {
    std::vector<std::optional<int>> coins(margins.size());
    for (std::size_t b = 0; b < margins.size(); ++b)
        if (is_tie_margin(margins[b], scales[b]))
            coins[b] = coin_for_bit(tie_seed, static_cast<int>(b));
    return coins;
}

int fuse_bit(const crowd::AnswerMatrix& answers, std::span<const double> weights,
             int bit_index, std::uint64_t tie_seed) {
    if (bit_index < 0 || bit_index >= answers.N)
        throw std::invalid_argument("fuse_bit: bit index out of range");
    const auto margins = bit_margins(answers, weights);
    const auto scales = bit_tie_scales(answers, weights);
    if (is_tie_margin(margins[bit_index], scales[bit_index]))
        return coin_for_bit(tie_seed, bit_index);
    return margins[bit_index] > 0.0 ? 1 : 0;
}

std::vector<double> candidate_scores(const crowd::AnswerMatrix& answers,
                                     std::span<const double> weights) {
    const auto cols = answers.classification_columns();
    const int N = static_cast<int>(cols.size());
    std::vector<double> scores(std::size_t{1} << N, 0.0);
    for (std::uint64_t d = 0; d < scores.size(); ++d) {
        double s = 0.0;
        for (int w = 0; w < answers.W; ++w) {
            for (int b = 0; b < N; ++b) {
                const int bit = static_cast<int>((d >> (N - 1 - b)) & 1u);
                const auto r = answers.at(w, cols[b]);
                if (r == crowd::Response::Skip) continue;
                if ((r == crowd::Response::One) == (bit == 1)) s += weights[w];
            }
        }
        scores[d] = s;
    }
    return scores;
}

ClassDecision classify(const crowd::AnswerMatrix& answers, std::span<const double> weights,
                       std::uint64_t tie_seed) {
    ClassDecision d;
    d.per_bit_margin = bit_margins(answers, weights);
    const auto scales = bit_tie_scales(answers, weights);
    const auto coins = tie_resolution_policy(d.per_bit_margin, scales, tie_seed);
    d.word.resize(d.per_bit_margin.size());
    for (std::size_t b = 0; b < d.word.size(); ++b) {
        d.word[b] = coins[b] ? static_cast<std::uint8_t>(*coins[b])
                             : static_cast<std::uint8_t>(d.per_bit_margin[b] > 0.0);
        d.class_index = (d.class_index << 1) | d.word[b];
    }
    return d;
}

}  // namespace crowdfuse::fusion
