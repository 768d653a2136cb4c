#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "crowdfuse/behavior.hpp"
#include "crowdfuse/rng.hpp"

// Synthetic crowd generation and one answering session: honest workers with
// a reject option plus Type I / Type II spammers.
namespace crowdfuse::crowd {

// Fixed value or uniform interval; the only distribution shapes the models
// need.
struct ScalarDist {
    double lo = 0.0;
    double hi = 0.0;

    static ScalarDist fixed(double v) { return {v, v}; }
    static ScalarDist uniform(double lo, double hi);

    bool is_fixed() const { return lo == hi; }
    double mean() const { return 0.5 * (lo + hi); }
    double sample(rng::Stream& s) const { return is_fixed() ? lo : s.uniform(lo, hi); }
};

// Confidence model: per question the worker draws t ~ U(lower, x), where the
// ability x is drawn once per worker from upper. Answer/skip follows the
// behavioral threshold; a given answer is correct with probability t.
struct ConfidenceModel {
    double lower = 0.5;
    ScalarDist upper;  // support must stay within (lower, 1]
};

// Skip/correct model: the worker skips a question with probability p and
// otherwise answers correctly with probability r; (p, r) are drawn once per
// worker from f_p, f_r (or per question in redraw mode).
struct SkipCorrectModel {
    ScalarDist f_p;  // support within [0, 1]
    ScalarDist f_r;  // support within [0, 1]; values below 1/2 model adversarial workers
};

using CrowdModelSpec = std::variant<ConfidenceModel, SkipCorrectModel>;

// Per-worker sampler for behavioral parameters.
struct PTPopulation {
    ScalarDist alpha = ScalarDist::fixed(1.0);
    ScalarDist beta = ScalarDist::fixed(1.0);
    ScalarDist delta = ScalarDist::fixed(1.0);

    static PTPopulation rational() { return {}; }
    static PTPopulation fixed(const behavior::PTParams& pt);
    bool is_fixed() const { return alpha.is_fixed() && beta.is_fixed() && delta.is_fixed(); }
};

struct CrowdConfig {
    int W = 0;   // total workers
    int M0 = 0;  // Type I spammers
    int MN = 0;  // Type II spammers
    int N = 1;   // classification questions
    int G = 0;   // gold questions
    behavior::PaymentConfig payment{0.6, 3, 1.0, 0.0};
    CrowdModelSpec model = SkipCorrectModel{ScalarDist::fixed(0.5), ScalarDist::fixed(0.75)};
    PTPopulation pt_population;
    bool redraw_per_question = false;  // resample (p, r) per question
    bool force_answer = false;         // disable the reject option (majority-vote baseline)

    int spammer_count() const { return M0 + MN; }
    int honest_count() const { return W - M0 - MN; }
    void validate() const;
};

enum class WorkerKind : std::uint8_t { Honest, TypeI, TypeII };
enum class Response : std::uint8_t { Zero, One, Skip };
enum class ColumnKind : std::uint8_t { Classification, Gold };

struct WorkerProfile {
    WorkerKind kind = WorkerKind::Honest;
    double p = 0.0;      // skip probability (SkipCorrectModel)
    double r = 0.0;      // correctness probability (SkipCorrectModel)
    double upper = 0.0;  // ability x (ConfidenceModel)
    double alpha = 1.0, beta = 1.0, delta = 1.0;
    double t_star = 0.0;  // cached behavioral threshold
};

struct CrowdInstance {
    std::vector<WorkerProfile> workers;
    std::uint64_t seed = 0;
};

// W x (N+G) grid of responses. worker_kind is simulation-only ground truth;
// inference and fusion never read it.
struct AnswerMatrix {
    int W = 0;
    int N = 0;
    int G = 0;
    std::vector<Response> responses;      // row-major W x (N+G)
    std::vector<std::uint8_t> truth;      // length N+G
    std::vector<ColumnKind> column_kind;  // length N+G
    std::vector<WorkerKind> worker_kind;  // length W (not serialized)
    std::uint64_t seed = 0;
    std::string config_digest;

    int columns() const { return N + G; }
    Response at(int w, int q) const { return responses[static_cast<std::size_t>(w) * columns() + q]; }
    int definitive_count(int w) const;                 // over all N+G columns
    int definitive_count_classification(int w) const;  // over the N classification columns
    std::vector<int> classification_columns() const;   // column indices in bit order
    std::vector<std::uint8_t> classification_truth() const;
};

struct CrowdStats {
    double m = 0.0;   // mean skip probability
    double mu = 0.0;  // mean correctness probability given a definitive answer
};

// Two readings of the worker quality mu for the confidence model; the
// conditional one is what the simulation realizes.
enum class MuReading { ConditionalCorrectness, UnconditionalMass };

// Population (m, mu) implied by a crowd model at payment threshold T.
// Confidence models integrate over the ability and PT-parameter laws; workers
// that never answer are excluded from mu.
CrowdStats crowd_stats(const CrowdModelSpec& model, double T, const PTPopulation& pt,
                       MuReading reading = MuReading::ConditionalCorrectness);

// f_r spec with mean mu: U(2*mu - 1, 1).
ScalarDist mu_to_fr(double mu);

CrowdInstance generate_crowd(const CrowdConfig& cfg, std::uint64_t seed);

AnswerMatrix run_session(const CrowdInstance& crowd, const CrowdConfig& cfg,
                         std::uint64_t seed);

// Stable 16-hex digest of the generation-relevant config fields.
std::string digest_config(const CrowdConfig& cfg);

}  // namespace crowdfuse::crowd
