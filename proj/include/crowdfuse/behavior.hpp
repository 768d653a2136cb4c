#pragma once

#include <span>
#include <vector>

// Prospect-theory primitives, the gold-question payment mechanism, and the
// answer/skip decisions of honest workers and spammers.
namespace crowdfuse::behavior {

// Bounds keep the behavioral powers numerically tame. Widen them explicitly
// if a study needs more extreme parameters.
struct PTBounds {
    double max_shape = 2.0;  // upper bound for alpha and delta
    double max_loss = 10.0;  // upper bound for beta
};

// Behavioral triple (alpha, beta, delta): probability distortion, loss
// aversion, diminishing marginal utility. (1,1,1) is a rational decision
// maker; Tversky's population means are (0.69, 2.25, 0.88).
struct PTParams {
    double alpha;
    double beta;
    double delta;

    PTParams(double alpha, double beta, double delta, PTBounds bounds = PTBounds{});

    static PTParams rational() { return PTParams(1.0, 1.0, 1.0); }
    bool is_rational() const { return alpha == 1.0 && beta == 1.0 && delta == 1.0; }
};

// Worker's outcome on one gold question. Wrong/Skipped/Correct map to the
// payment multipliers 0, 1, 1/T.
enum class GoldOutcome { Wrong, Skipped, Correct };

enum class SpammerType {
    TypeI,   // skips every question
    TypeII,  // answers every question with uniform guesses
};

enum class Decision { Answer, Skip };

// Parameters of the skip-based payment rule: a worker earns
// mu_min + kappa * prod(multipliers over the G gold questions),
// kappa = (mu_max - mu_min) * T^G.
struct PaymentConfig {
    double threshold_T;  // confidence threshold in [1/2, 1)
    int gold_count_G;    // gold questions per session (0 allowed; degenerates to mu_max)
    double mu_max;
    double mu_min;

    PaymentConfig(double threshold_T, int gold_count_G, double mu_max, double mu_min);

    double kappa() const;
};

// Comparisons against thresholds use this absolute tolerance.
inline constexpr double kThresholdTol = 1e-12;

// Subjective utility of an outcome x relative to the zero reference point:
// x^delta for gains, -beta*(-x)^delta for losses.
double value_function(double x, const PTParams& pt);

// Distorted perception of a probability x in [0,1]:
// x^alpha / (x^alpha + (1-x)^alpha)^(1/alpha). Fixes 0 and 1.
double probability_weight(double x, const PTParams& pt);

// Effective answer/skip threshold t* of a behavioral worker facing payment
// threshold T: eta = (beta*T/(1-T))^(delta/alpha), t* = eta/(1+eta).
// Rational workers get t* = T.
double confidence_threshold(double T, const PTParams& pt);

// Subjective payoff of answering one question at confidence t when the
// variable reward at stake is Z. Positive exactly when t exceeds the
// confidence_threshold; the loss branch values -(beta*Z)^delta so the zero
// crossing lands on t* for every Z and every (alpha, beta, delta).
double subjective_payoff(double t, double Z, double T, const PTParams& pt);

// Answer iff t > t*; ties (within kThresholdTol) skip.
Decision honest_decision(double t, double T, const PTParams& pt);
Decision honest_decision_at_threshold(double t, double t_star);

// Optimal strategy of a reward-maximizing spammer (Prop 1): answer all when
// T < 1/2, skip all when T >= 1/2 (at T = 1/2 the reward is g-independent).
SpammerType spammer_strategy_rational(double T);

// Behavioral spammer rule: TypeII iff T > 1/(beta+1).
SpammerType spammer_strategy_pt(double T, const PTParams& pt);

// Payment for a full gold-question record. Any wrong answer floors the
// variable reward to zero.
double payment(std::span<const GoldOutcome> outcomes, const PaymentConfig& cfg);

// Closed-form expected reward of a spammer that skips g of the G gold
// questions and guesses the rest: (mu_max-mu_min)*(1/2)^G*(2T)^g + mu_min.
double spammer_expected_reward(int skipped_gold, const PaymentConfig& cfg);

}  // namespace crowdfuse::behavior
