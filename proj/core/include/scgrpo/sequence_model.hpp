#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scgrpo/policy.hpp"

namespace scgrpo {

// Splits a response into tag markers and whitespace-separated words.
// join_tokens() inverts it for whitespace-normalized text.
std::vector<std::string> tokenize_response(std::string_view text);
std::string join_tokens(std::span<const std::string> tokens);

class Vocabulary {
 public:
  static constexpr int kEos = 0;

  Vocabulary();
  // Tokens of every text, in first-seen order after the end marker.
  static Vocabulary build(std::span<const std::string> texts);

  int size() const { return static_cast<int>(tokens_.size()); }
  int add(const std::string& token);
  // Throws ContractError for out-of-vocabulary tokens.
  int id(const std::string& token) const;
  bool contains(const std::string& token) const { return ids_.count(token) != 0; }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }

  // Token ids of `text` followed by the end marker.
  std::vector<int> encode(std::string_view text) const;
  // Text up to the first end marker.
  std::string decode(std::span<const int> ids) const;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> ids_;
};

// Autoregressive toy model: the next-token distribution is a softmax over a
// logit row selected by (state, position in the sequence). Position rows
// beyond max_length reuse the last row.
class SequenceModel {
 public:
  SequenceModel(Vocabulary vocab, int num_states, int max_length);

  const Vocabulary& vocabulary() const { return vocab_; }
  int num_states() const { return num_states_; }
  int max_length() const { return max_length_; }

  std::vector<double> next_log_probs(int state, int position) const;
  std::vector<double>& row(int state, int position);
  const std::vector<double>& row(int state, int position) const;

  // Greedy decode until the end marker or max_length tokens.
  std::string generate(int state) const;

 private:
  std::size_t row_index(int state, int position) const;

  Vocabulary vocab_;
  int num_states_;
  int max_length_;
  std::vector<std::vector<double>> rows_;
};

struct SftExample {
  int state = 0;
  std::vector<int> tokens;  // target ids, end marker included
};

// -sum_i log pi(o_i | state, o_<i). Throws ContractError on unknown ids.
double sequence_nll(const SequenceModel& model, const SftExample& sample);
double mean_sequence_nll(const SequenceModel& model, std::span<const SftExample> dataset);

// Full-batch gradient descent on the mean sequence NLL.
SequenceModel run_pa_sft(SequenceModel model, std::span<const SftExample> dataset, int epochs,
                         double learning_rate);

// Stage-2 initialization: each candidate's logit is its length-normalized
// log-likelihood under the model at the given model state.
ToyPolicy policy_from_sequence_model(const SequenceModel& model,
                                     const ToyPolicy::ActionTable& actions,
                                     std::span<const int> model_state_of);

}  // namespace scgrpo
