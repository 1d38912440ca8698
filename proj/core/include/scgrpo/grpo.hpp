#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "scgrpo/policy.hpp"
#include "scgrpo/rng.hpp"
#include "scgrpo/types.hpp"

namespace scgrpo {

struct TrainConfig {
  int group_size = 8;          // G >= 2
  double kl_coeff = 0.04;      // beta >= 0
  double clip = 0.2;           // epsilon in (0, 1)
  double learning_rate = 1.0;  // alpha > 0 (0 allowed to freeze the policy)
  int epochs = 200;            // E >= 1
  std::uint64_t seed = 0;
  double std_floor = 1e-8;
  int batch_size = 0;          // states per update; 0 = every state

  // Throws ConfigError on the first violated bound.
  void validate() const;
};

// G responses for one state, their scalar rewards and normalized advantages.
struct RolloutGroup {
  int state = 0;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<double> advantages;
};

std::vector<int> sample_group(const ToyPolicy& policy, int state, int group_size, Rng& rng);
std::vector<int> sample_group(const ToyPolicy& policy, int state, int group_size,
                              std::uint64_t seed);

// (r - mean) / std with population std. All zeros when std < std_floor.
std::vector<double> compute_advantages(std::span<const double> rewards, double std_floor = 1e-8);

double importance_ratio(const ToyPolicy& policy, const ToyPolicy& reference, int state,
                        int action);

// min(rho * A, clamp(rho, 1 - clip, 1 + clip) * A)
double clipped_term(double rho, double advantage, double clip);

// Mean over `states` of the exact KL(policy || reference) at each state.
double kl_penalty(const ToyPolicy& policy, const ToyPolicy& reference,
                  std::span<const int> states);

// Clipped surrogate averaged within each group and across groups, minus
// kl_coeff times the KL to `reference` over the groups' states. Ratios are
// taken against `old`, the policy the groups were sampled from.
double objective(const ToyPolicy& policy, const ToyPolicy& old, const ToyPolicy& reference,
                 std::span<const RolloutGroup> groups, const TrainConfig& config);
// Ratios and KL both against `reference`.
double objective(const ToyPolicy& policy, const ToyPolicy& reference,
                 std::span<const RolloutGroup> groups, const TrainConfig& config);

// Exact gradient of objective() with respect to every logit. On the clipped
// branch the surrogate contributes zero.
LogitTable objective_gradient(const ToyPolicy& policy, const ToyPolicy& old,
                              const ToyPolicy& reference, std::span<const RolloutGroup> groups,
                              const TrainConfig& config);
LogitTable objective_gradient(const ToyPolicy& policy, const ToyPolicy& reference,
                              std::span<const RolloutGroup> groups, const TrainConfig& config);

struct TrainingState {
  int state = 0;
  GroundTruth ground_truth;
};

using Scorer = std::function<double(std::string_view raw, const GroundTruth&)>;

struct IterationStats {
  int iteration = 0;
  double mean_reward = 0.0;     // expected reward of the policy before the update
  double sampled_reward = 0.0;  // mean over the sampled responses
  double kl = 0.0;           // KL to the frozen reference before the update
  double objective = 0.0;    // objective before the update

  bool operator==(const IterationStats&) const = default;
};

struct TrainResult {
  ToyPolicy policy;
  std::vector<IterationStats> curve;
};

// Group-relative policy optimization over the dataset. The reference policy
// is the input policy, frozen. Each update samples fresh groups from the
// current policy and takes one gradient-ascent step of size learning_rate.
TrainResult run_sc_grpo(std::span<const TrainingState> dataset, const ToyPolicy& policy,
                        const Scorer& scorer, const TrainConfig& config);

// Exact expectation of the scorer under the policy, averaged over the dataset.
double expected_reward(const ToyPolicy& policy, std::span<const TrainingState> dataset,
                       const Scorer& scorer);
// Mean over the dataset of the best candidate's score.
double max_achievable_reward(const ToyPolicy& policy, std::span<const TrainingState> dataset,
                             const Scorer& scorer);

}  // namespace scgrpo
