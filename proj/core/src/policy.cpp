#include "scgrpo/policy.hpp"

#include <algorithm>
#include <cmath>

#include "scgrpo/errors.hpp"

namespace scgrpo {

ToyPolicy::ToyPolicy(ActionTable actions) : actions_(std::move(actions)) {
  logits_.reserve(actions_.size());
  for (const auto& row : actions_) {
    if (row.empty()) throw ConfigError("every state needs at least one candidate action");
    logits_.emplace_back(row.size(), 0.0);
  }
}

ToyPolicy::ToyPolicy(ActionTable actions, LogitTable logits) : ToyPolicy(std::move(actions)) {
  set_logits(std::move(logits));
}

int ToyPolicy::num_actions(int state) const {
  check_state(state);
  return static_cast<int>(actions_[static_cast<std::size_t>(state)].size());
}

const std::string& ToyPolicy::action(int state, int a) const {
  check_state(state);
  return actions_[static_cast<std::size_t>(state)].at(static_cast<std::size_t>(a));
}

void ToyPolicy::set_logits(LogitTable logits) {
  if (logits.size() != actions_.size()) throw ConfigError("logit table has the wrong state count");
  for (std::size_t s = 0; s < logits.size(); ++s) {
    if (logits[s].size() != actions_[s].size()) {
      throw ConfigError("logit row " + std::to_string(s) + " has the wrong action count");
    }
  }
  logits_ = std::move(logits);
}

void ToyPolicy::step(const LogitTable& delta, double scale) {
  for (std::size_t s = 0; s < logits_.size(); ++s) {
    for (std::size_t a = 0; a < logits_[s].size(); ++a) logits_[s][a] += scale * delta[s][a];
  }
}

std::vector<double> ToyPolicy::log_probabilities(int state) const {
  check_state(state);
  const auto& z = logits_[static_cast<std::size_t>(state)];
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  const double log_norm = m + std::log(sum);
  std::vector<double> out(z.size());
  for (std::size_t a = 0; a < z.size(); ++a) out[a] = z[a] - log_norm;
  return out;
}

std::vector<double> ToyPolicy::probabilities(int state) const {
  std::vector<double> p = log_probabilities(state);
  for (double& v : p) v = std::exp(v);
  return p;
}

double ToyPolicy::probability(int state, int action) const {
  return probabilities(state).at(static_cast<std::size_t>(action));
}

bool ToyPolicy::same_shape(const ToyPolicy& other) const {
  if (actions_.size() != other.actions_.size()) return false;
  for (std::size_t s = 0; s < actions_.size(); ++s) {
    if (actions_[s].size() != other.actions_[s].size()) return false;
  }
  return true;
}

LogitTable ToyPolicy::zeros_like() const {
  LogitTable z;
  z.reserve(logits_.size());
  for (const auto& row : logits_) z.emplace_back(row.size(), 0.0);
  return z;
}

void ToyPolicy::check_state(int state) const {
  if (state < 0 || state >= num_states()) {
    throw ContractError("state id " + std::to_string(state) + " out of range");
  }
}

namespace {

double state_tv(const ToyPolicy& a, const ToyPolicy& b, int s) {
  const auto pa = a.probabilities(s);
  const auto pb = b.probabilities(s);
  double tv = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) tv += std::abs(pa[i] - pb[i]);
  return 0.5 * tv;
}

}  // namespace

double mean_total_variation(const ToyPolicy& a, const ToyPolicy& b) {
  if (!a.same_shape(b)) throw ContractError("policies differ in shape");
  double sum = 0.0;
  for (int s = 0; s < a.num_states(); ++s) sum += state_tv(a, b, s);
  return a.num_states() == 0 ? 0.0 : sum / a.num_states();
}

double max_total_variation(const ToyPolicy& a, const ToyPolicy& b) {
  if (!a.same_shape(b)) throw ContractError("policies differ in shape");
  double worst = 0.0;
  for (int s = 0; s < a.num_states(); ++s) worst = std::max(worst, state_tv(a, b, s));
  return worst;
}

}  // namespace scgrpo
