#include "scgrpo/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "scgrpo/errors.hpp"

namespace scgrpo {

void TrainConfig::validate() const {
  if (group_size < 2) throw ConfigError("group_size must be >= 2");
  if (!(kl_coeff >= 0.0)) throw ConfigError("kl_coeff must be >= 0");
  if (!(clip > 0.0 && clip < 1.0)) throw ConfigError("clip must be in (0, 1)");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(std_floor >= 0.0)) throw ConfigError("std_floor must be >= 0");
  if (batch_size < 0) throw ConfigError("batch_size must be >= 0");
}

std::vector<int> sample_group(const ToyPolicy& policy, int state, int group_size, Rng& rng) {
  if (group_size < 2) throw ContractError("group size must be >= 2");
  const std::vector<double> p = policy.probabilities(state);
  std::vector<double> cdf(p.size());
  std::partial_sum(p.begin(), p.end(), cdf.begin());

  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(group_size));
  for (int i = 0; i < group_size; ++i) {
    const double u = rng.uniform01() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto idx = std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(p.size()) - 1);
    out.push_back(static_cast<int>(idx));
  }
  return out;
}

std::vector<int> sample_group(const ToyPolicy& policy, int state, int group_size,
                              std::uint64_t seed) {
  Rng rng(seed);
  return sample_group(policy, state, group_size, rng);
}

std::vector<double> compute_advantages(std::span<const double> rewards, double std_floor) {
  if (rewards.size() < 2) throw ContractError("advantages need a group of at least 2");
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);

  std::vector<double> adv(rewards.size(), 0.0);
  if (sd < std_floor || sd == 0.0) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

double importance_ratio(const ToyPolicy& policy, const ToyPolicy& reference, int state,
                        int action) {
  if (!policy.same_shape(reference)) throw ContractError("policies differ in shape");
  const double q = reference.probability(state, action);
  if (q <= 0.0) {
    throw NumericDomainError("reference probability is zero for state " + std::to_string(state) +
                             ", action " + std::to_string(action));
  }
  return policy.probability(state, action) / q;
}

double clipped_term(double rho, double advantage, double clip) {
  const double clamped = std::clamp(rho, 1.0 - clip, 1.0 + clip);
  return std::min(rho * advantage, clamped * advantage);
}

namespace {

// KL(p || q) at one state, computed from log-probabilities.
double state_kl(const std::vector<double>& logp, const std::vector<double>& logq, int state) {
  double kl = 0.0;
  for (std::size_t a = 0; a < logp.size(); ++a) {
    const double p = std::exp(logp[a]);
    if (p == 0.0) continue;
    if (!std::isfinite(logq[a])) {
      throw NumericDomainError("reference has no mass where the policy does (state " +
                               std::to_string(state) + ")");
    }
    kl += p * (logp[a] - logq[a]);
  }
  return kl;
}

void check_groups(const ToyPolicy& policy, const ToyPolicy& old, const ToyPolicy& reference,
                  std::span<const RolloutGroup> groups) {
  if (groups.empty()) throw ContractError("objective needs at least one group");
  if (!policy.same_shape(old) || !policy.same_shape(reference)) {
    throw ContractError("policies differ in shape");
  }
  for (const RolloutGroup& g : groups) {
    if (g.actions.size() != g.advantages.size() || g.actions.size() < 2) {
      throw ContractError("group actions and advantages must have equal length >= 2");
    }
  }
}

std::vector<int> group_states(std::span<const RolloutGroup> groups) {
  std::vector<int> states;
  states.reserve(groups.size());
  for (const RolloutGroup& g : groups) states.push_back(g.state);
  return states;
}

}  // namespace

double kl_penalty(const ToyPolicy& policy, const ToyPolicy& reference,
                  std::span<const int> states) {
  if (!policy.same_shape(reference)) throw NumericDomainError("policies differ in support");
  if (states.empty()) return 0.0;
  double sum = 0.0;
  for (int s : states) {
    sum += state_kl(policy.log_probabilities(s), reference.log_probabilities(s), s);
  }
  return sum / static_cast<double>(states.size());
}

double objective(const ToyPolicy& policy, const ToyPolicy& old, const ToyPolicy& reference,
                 std::span<const RolloutGroup> groups, const TrainConfig& config) {
  check_groups(policy, old, reference, groups);
  double surrogate = 0.0;
  for (const RolloutGroup& g : groups) {
    const auto logp = policy.log_probabilities(g.state);
    const auto logq = old.log_probabilities(g.state);
    double group_sum = 0.0;
    for (std::size_t i = 0; i < g.actions.size(); ++i) {
      const auto a = static_cast<std::size_t>(g.actions[i]);
      const double rho = std::exp(logp.at(a) - logq.at(a));
      group_sum += clipped_term(rho, g.advantages[i], config.clip);
    }
    surrogate += group_sum / static_cast<double>(g.actions.size());
  }
  surrogate /= static_cast<double>(groups.size());
  const std::vector<int> states = group_states(groups);
  return surrogate - config.kl_coeff * kl_penalty(policy, reference, states);
}

double objective(const ToyPolicy& policy, const ToyPolicy& reference,
                 std::span<const RolloutGroup> groups, const TrainConfig& config) {
  return objective(policy, reference, reference, groups, config);
}

LogitTable objective_gradient(const ToyPolicy& policy, const ToyPolicy& old,
                              const ToyPolicy& reference, std::span<const RolloutGroup> groups,
                              const TrainConfig& config) {
  check_groups(policy, old, reference, groups);
  LogitTable grad = policy.zeros_like();
  const double per_group = 1.0 / static_cast<double>(groups.size());

  for (const RolloutGroup& g : groups) {
    const auto s = static_cast<std::size_t>(g.state);
    const auto logp = policy.log_probabilities(g.state);
    const auto logq = old.log_probabilities(g.state);
    const double w = per_group / static_cast<double>(g.actions.size());

    for (std::size_t i = 0; i < g.actions.size(); ++i) {
      const auto a = static_cast<std::size_t>(g.actions[i]);
      const double adv = g.advantages[i];
      const double rho = std::exp(logp.at(a) - logq.at(a));
      const double clamped = std::clamp(rho, 1.0 - config.clip, 1.0 + config.clip);
      if (rho * adv > clamped * adv) continue;  // clipped branch is flat
      // d rho / d z_b = rho * (1[b == a] - p_b)
      for (std::size_t b = 0; b < logp.size(); ++b) {
        const double indicator = b == a ? 1.0 : 0.0;
        grad[s][b] += w * adv * rho * (indicator - std::exp(logp[b]));
      }
    }

    if (config.kl_coeff != 0.0) {
      // d KL / d z_b = p_b * (log p_b - log r_b - KL)
      const auto logr = reference.log_probabilities(g.state);
      const double kl = state_kl(logp, logr, g.state);
      for (std::size_t b = 0; b < logp.size(); ++b) {
        const double p = std::exp(logp[b]);
        grad[s][b] -= config.kl_coeff * per_group * p * (logp[b] - logr[b] - kl);
      }
    }
  }
  return grad;
}

LogitTable objective_gradient(const ToyPolicy& policy, const ToyPolicy& reference,
                              std::span<const RolloutGroup> groups, const TrainConfig& config) {
  return objective_gradient(policy, reference, reference, groups, config);
}

TrainResult run_sc_grpo(std::span<const TrainingState> dataset, const ToyPolicy& policy,
                        const Scorer& scorer, const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw ConfigError("training dataset is empty");
  for (const TrainingState& ts : dataset) {
    if (ts.state < 0 || ts.state >= policy.num_states()) {
      throw ConfigError("dataset state " + std::to_string(ts.state) + " has no action row");
    }
    if (policy.num_actions(ts.state) < 2) {
      throw ConfigError("state " + std::to_string(ts.state) + " needs at least 2 candidates");
    }
  }

  // The scorer is deterministic, so every candidate is scored once up front.
  std::vector<std::vector<double>> scores(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const TrainingState& ts = dataset[i];
    for (int a = 0; a < policy.num_actions(ts.state); ++a) {
      scores[i].push_back(scorer(policy.action(ts.state, a), ts.ground_truth));
    }
  }
  auto expected = [&](const ToyPolicy& pi) {
    double sum = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const auto p = pi.probabilities(dataset[i].state);
      for (std::size_t a = 0; a < p.size(); ++a) sum += p[a] * scores[i][a];
    }
    return sum / static_cast<double>(dataset.size());
  };

  const ToyPolicy reference = policy;
  TrainResult result{policy, {}};
  ToyPolicy& current = result.policy;
  Rng rng(config.seed);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch =
      config.batch_size == 0 ? dataset.size()
                             : std::min(dataset.size(), static_cast<std::size_t>(config.batch_size));

  int iteration = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      std::vector<RolloutGroup> groups;
      groups.reserve(stop - start);
      double reward_sum = 0.0;
      std::size_t reward_count = 0;

      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t idx = order[k];
        RolloutGroup g;
        g.state = dataset[idx].state;
        g.actions = sample_group(current, g.state, config.group_size, rng);
        g.rewards.reserve(g.actions.size());
        for (int a : g.actions) g.rewards.push_back(scores[idx][static_cast<std::size_t>(a)]);
        g.advantages = compute_advantages(g.rewards, config.std_floor);
        reward_sum += std::accumulate(g.rewards.begin(), g.rewards.end(), 0.0);
        reward_count += g.rewards.size();
        groups.push_back(std::move(g));
      }

      const ToyPolicy old = current;
      IterationStats stats;
      stats.iteration = iteration++;
      stats.mean_reward = expected(current);
      stats.sampled_reward = reward_sum / static_cast<double>(reward_count);
      stats.kl = kl_penalty(current, reference, group_states(groups));
      stats.objective = objective(current, old, reference, groups, config);
      result.curve.push_back(stats);

      if (config.learning_rate != 0.0) {
        current.step(objective_gradient(current, old, reference, groups, config),
                     config.learning_rate);
      }
    }
  }
  return result;
}

double expected_reward(const ToyPolicy& policy, std::span<const TrainingState> dataset,
                       const Scorer& scorer) {
  if (dataset.empty()) return 0.0;
  double sum = 0.0;
  for (const TrainingState& ts : dataset) {
    const auto p = policy.probabilities(ts.state);
    for (std::size_t a = 0; a < p.size(); ++a) {
      sum += p[a] * scorer(policy.action(ts.state, static_cast<int>(a)), ts.ground_truth);
    }
  }
  return sum / static_cast<double>(dataset.size());
}

double max_achievable_reward(const ToyPolicy& policy, std::span<const TrainingState> dataset,
                             const Scorer& scorer) {
  if (dataset.empty()) return 0.0;
  double sum = 0.0;
  for (const TrainingState& ts : dataset) {
    double best = -INFINITY;
    for (int a = 0; a < policy.num_actions(ts.state); ++a) {
      best = std::max(best, scorer(policy.action(ts.state, a), ts.ground_truth));
    }
    sum += best;
  }
  return sum / static_cast<double>(dataset.size());
}

}  // namespace scgrpo
