#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "crowdfuse/crowd.hpp"

// Estimation of crowd parameters (m, mu) and spammer counts (M0, MN) from
// observable responses only.
namespace crowdfuse::inference {

enum class MuMethod { GoldTraining, MajorityVote };

struct CrowdEstimates {
    double m_hat = 0.0;
    double mu_hat = 0.0;  // clamped to [1/2, 1]
    int M0_hat = 0;
    int MN_hat = 0;
    double log_likelihood = 0.0;  // at the (M0_hat, MN_hat) maximum
    MuMethod method_mu = MuMethod::GoldTraining;
};

struct ExtremeCounts {
    int all_definitive = 0;  // W_{N+G}
    int all_skip = 0;        // W_0
};

struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Workers definitive on all N+G columns and workers skipping everything.
ExtremeCounts extreme_counts(const crowd::AnswerMatrix& answers);

// Skip fraction over the N+G cells of non-extreme workers.
// Throws EstimationError when every worker is extreme.
double estimate_m(const crowd::AnswerMatrix& answers);

// GoldTraining: fraction of correct definitive answers on gold columns.
// MajorityVote: per classification column, the simple majority of definitive
// answers of non-extreme workers acts as pseudo-truth (tied columns are
// dropped); returns the fraction agreeing. Both clamp to [1/2, 1] and use
// non-extreme workers only.
double estimate_mu(const crowd::AnswerMatrix& answers, MuMethod method);

// Log of the joint likelihood of observing (W_{N+G}, W_0) extreme workers
// given spammer counts; -inf outside the support.
double spammer_count_log_likelihood(int w_all, int w_none, int MN, int M0, int W,
                                    double m_hat, int N, int G);

// Exhaustive MLE over M0 in [0, W_0], MN in [0, W_{N+G}]. Ties prefer the
// smallest M0 + MN, then the smallest M0. Returns ((M0_hat, MN_hat), loglik).
std::pair<std::pair<int, int>, double> estimate_spammer_counts(int w_all, int w_none,
                                                               int W, double m_hat,
                                                               int N, int G);

// Full single-session pipeline: m, mu, then the spammer-count MLE.
CrowdEstimates estimate_crowd(const crowd::AnswerMatrix& answers,
                              MuMethod method = MuMethod::GoldTraining);

// Pooled variant: one crowd answering several independent sessions.
// m and mu pool the non-extreme cells; the MLE maximizes the summed
// log-likelihood of every session's extreme counts.
CrowdEstimates estimate_crowd_pooled(std::span<const crowd::AnswerMatrix> sessions,
                                     MuMethod method = MuMethod::GoldTraining);

struct SurfacePoint {
    int M0 = 0;
    int MN = 0;
    double log_likelihood = 0.0;
};

// The full evaluated likelihood surface (for CSV export).
std::vector<SurfacePoint> likelihood_surface(int w_all, int w_none, int W, double m_hat,
                                             int N, int G);

}  // namespace crowdfuse::inference
