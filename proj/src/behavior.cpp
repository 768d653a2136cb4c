#include "crowdfuse/behavior.hpp"

#include <cmath>
#include <stdexcept>

namespace crowdfuse::behavior {

PTParams::PTParams(double alpha, double beta, double delta, PTBounds bounds)
    : alpha(alpha), beta(beta), delta(delta) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(delta > 0.0))
        throw std::invalid_argument("PTParams: alpha, beta, delta must be positive");
    if (alpha > bounds.max_shape || delta > bounds.max_shape)
        throw std::invalid_argument("PTParams: alpha/delta outside (0, max_shape]");
    if (beta > bounds.max_loss)
        throw std::invalid_argument("PTParams: beta outside (0, max_loss]");
}

PaymentConfig::PaymentConfig(double threshold_T, int gold_count_G, double mu_max,
                             double mu_min)
    : threshold_T(threshold_T), gold_count_G(gold_count_G), mu_max(mu_max), mu_min(mu_min) {
    if (!(threshold_T >= 0.5) || !(threshold_T < 1.0))
        throw std::invalid_argument("PaymentConfig: T must lie in [1/2, 1)");
    if (gold_count_G < 0)
        throw std::invalid_argument("PaymentConfig: G must be nonnegative");
    if (!(mu_max > mu_min) || !(mu_min >= 0.0))
        throw std::invalid_argument("PaymentConfig: need mu_max > mu_min >= 0");
}

double PaymentConfig::kappa() const {
    return (mu_max - mu_min) * std::pow(threshold_T, gold_count_G);
}

double value_function(double x, const PTParams& pt) {
    if (!std::isfinite(x)) throw std::domain_error("value_function: x must be finite");
    if (x >= 0.0) return std::pow(x, pt.delta);
    return -pt.beta * std::pow(-x, pt.delta);
}

double probability_weight(double x, const PTParams& pt) {
    if (!(x >= 0.0) || !(x <= 1.0))
        throw std::domain_error("probability_weight: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double xa = std::pow(x, pt.alpha);
    const double ya = std::pow(1.0 - x, pt.alpha);
    return xa / std::pow(xa + ya, 1.0 / pt.alpha);
}

double confidence_threshold(double T, const PTParams& pt) {
    if (!(T > 0.0) || !(T < 1.0))
        throw std::domain_error("confidence_threshold: T must lie in (0, 1)");
    const double eta = std::pow(pt.beta * T / (1.0 - T), pt.delta / pt.alpha);
    // eta/(1+eta), written to stay accurate for large eta
    return eta > 1.0 ? 1.0 / (1.0 + 1.0 / eta) : eta / (1.0 + eta);
}

double subjective_payoff(double t, double Z, double T, const PTParams& pt) {
    if (!(t >= 0.0) || !(t <= 1.0))
        throw std::domain_error("subjective_payoff: t must lie in [0, 1]");
    if (!(Z > 0.0)) throw std::domain_error("subjective_payoff: Z must be positive");
    if (!(T > 0.0) || !(T < 1.0))
        throw std::domain_error("subjective_payoff: T must lie in (0, 1)");
    const double gain = Z * (1.0 / T - 1.0);
    return probability_weight(t, pt) * std::pow(gain, pt.delta) -
           probability_weight(1.0 - t, pt) * std::pow(pt.beta * Z, pt.delta);
}

Decision honest_decision_at_threshold(double t, double t_star) {
    return t > t_star + kThresholdTol ? Decision::Answer : Decision::Skip;
}

Decision honest_decision(double t, double T, const PTParams& pt) {
    return honest_decision_at_threshold(t, confidence_threshold(T, pt));
}

SpammerType spammer_strategy_rational(double T) {
    if (!(T > 0.0) || !(T < 1.0))
        throw std::domain_error("spammer_strategy_rational: T must lie in (0, 1)");
    return T < 0.5 ? SpammerType::TypeII : SpammerType::TypeI;
}

SpammerType spammer_strategy_pt(double T, const PTParams& pt) {
    if (!(T > 0.0) || !(T < 1.0))
        throw std::domain_error("spammer_strategy_pt: T must lie in (0, 1)");
    return T > 1.0 / (pt.beta + 1.0) ? SpammerType::TypeII : SpammerType::TypeI;
}

double payment(std::span<const GoldOutcome> outcomes, const PaymentConfig& cfg) {
    if (static_cast<int>(outcomes.size()) != cfg.gold_count_G)
        throw std::invalid_argument("payment: outcome list length must equal G");
    double prod = 1.0;
    for (GoldOutcome o : outcomes) {
        switch (o) {
            case GoldOutcome::Wrong: return cfg.mu_min;  // no-free-lunch floor
            case GoldOutcome::Skipped: break;            // multiplier 1
            case GoldOutcome::Correct: prod /= cfg.threshold_T; break;
        }
    }
    const double pay = cfg.mu_min + cfg.kappa() * prod;
    return std::min(cfg.mu_max, std::max(cfg.mu_min, pay));
}

double spammer_expected_reward(int skipped_gold, const PaymentConfig& cfg) {
    if (skipped_gold < 0 || skipped_gold > cfg.gold_count_G)
        throw std::invalid_argument("spammer_expected_reward: g out of [0, G]");
    return (cfg.mu_max - cfg.mu_min) * std::pow(0.5, cfg.gold_count_G) *
               std::pow(2.0 * cfg.threshold_T, skipped_gold) +
           cfg.mu_min;
}

}  // namespace crowdfuse::behavior
