#pragma once

#include <string>
#include <vector>

namespace scgrpo {

// logits[state][action]; rows may differ in length.
using LogitTable = std::vector<std::vector<double>>;

// Categorical policy over a fixed per-state table of candidate responses.
// A state stands in for an (image, prompt) pair.
class ToyPolicy {
 public:
  using ActionTable = std::vector<std::vector<std::string>>;

  // Uniform policy (all logits zero).
  explicit ToyPolicy(ActionTable actions);
  // Throws ConfigError if the shapes disagree or a row is empty.
  ToyPolicy(ActionTable actions, LogitTable logits);

  int num_states() const { return static_cast<int>(actions_.size()); }
  int num_actions(int state) const;
  const std::string& action(int state, int a) const;
  const ActionTable& action_table() const { return actions_; }

  const LogitTable& logits() const { return logits_; }
  void set_logits(LogitTable logits);
  // logits += scale * delta
  void step(const LogitTable& delta, double scale);

  // Softmax of the state's logits, max-shifted.
  std::vector<double> probabilities(int state) const;
  std::vector<double> log_probabilities(int state) const;
  double probability(int state, int action) const;

  // Same state/action layout.
  bool same_shape(const ToyPolicy& other) const;
  LogitTable zeros_like() const;

 private:
  void check_state(int state) const;

  ActionTable actions_;
  LogitTable logits_;
};

// Sum over states of the total-variation distance, divided by state count.
double mean_total_variation(const ToyPolicy& a, const ToyPolicy& b);
// Largest per-state total-variation distance.
double max_total_variation(const ToyPolicy& a, const ToyPolicy& b);

}  // namespace scgrpo
