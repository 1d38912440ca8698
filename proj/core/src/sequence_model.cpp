#include "scgrpo/sequence_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "scgrpo/errors.hpp"
#include "text_util.hpp"

namespace scgrpo {
namespace {

constexpr std::array<std::string_view, 8> kMarkers = {
    "<think>", "</think>", "<location>", "</location>",
    "<type>",  "</type>",  "<answer>",   "</answer>"};

bool is_marker(std::string_view token) {
  return std::find(kMarkers.begin(), kMarkers.end(), token) != kMarkers.end();
}

void softmax_in_place(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

}  // namespace

std::vector<std::string> tokenize_response(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '<') {
      bool hit = false;
      for (std::string_view m : kMarkers) {
        if (text.compare(i, m.size(), m) == 0) {
          flush();
          out.emplace_back(m);
          i += m.size();
          hit = true;
          break;
        }
      }
      if (hit) continue;
    }
    if (detail::is_space(text[i])) {
      flush();
    } else {
      word.push_back(text[i]);
    }
    ++i;
  }
  flush();
  return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  bool prev_word = false;
  for (const std::string& t : tokens) {
    const bool word = !is_marker(t);
    if (word && prev_word) out.push_back(' ');
    out += t;
    prev_word = word;
  }
  return out;
}

Vocabulary::Vocabulary() { add("</s>"); }

Vocabulary Vocabulary::build(std::span<const std::string> texts) {
  Vocabulary v;
  for (const std::string& text : texts) {
    for (const std::string& t : tokenize_response(text)) v.add(t);
  }
  return v;
}

int Vocabulary::add(const std::string& token) {
  const auto [it, inserted] = ids_.emplace(token, size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

int Vocabulary::id(const std::string& token) const {
  const auto it = ids_.find(token);
  if (it == ids_.end()) throw ContractError("token '" + token + "' is not in the vocabulary");
  return it->second;
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const std::string& t : tokenize_response(text)) ids.push_back(id(t));
  ids.push_back(kEos);
  return ids;
}

std::string Vocabulary::decode(std::span<const int> ids) const {
  std::vector<std::string> toks;
  for (int i : ids) {
    if (i == kEos) break;
    toks.push_back(token(i));
  }
  return join_tokens(toks);
}

SequenceModel::SequenceModel(Vocabulary vocab, int num_states, int max_length)
    : vocab_(std::move(vocab)), num_states_(num_states), max_length_(max_length) {
  if (num_states < 1 || max_length < 1) {
    throw ConfigError("sequence model needs at least one state and one position");
  }
  rows_.assign(static_cast<std::size_t>(num_states) * static_cast<std::size_t>(max_length),
               std::vector<double>(static_cast<std::size_t>(vocab_.size()), 0.0));
}

std::size_t SequenceModel::row_index(int state, int position) const {
  if (state < 0 || state >= num_states_) {
    throw ContractError("model state " + std::to_string(state) + " out of range");
  }
  const int pos = std::clamp(position, 0, max_length_ - 1);
  return static_cast<std::size_t>(state) * static_cast<std::size_t>(max_length_) +
         static_cast<std::size_t>(pos);
}

std::vector<double>& SequenceModel::row(int state, int position) {
  return rows_[row_index(state, position)];
}

const std::vector<double>& SequenceModel::row(int state, int position) const {
  return rows_[row_index(state, position)];
}

std::vector<double> SequenceModel::next_log_probs(int state, int position) const {
  std::vector<double> z = row(state, position);
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  const double log_norm = m + std::log(sum);
  for (double& v : z) v -= log_norm;
  return z;
}

std::string SequenceModel::generate(int state) const {
  std::vector<int> ids;
  for (int pos = 0; pos < max_length_; ++pos) {
    const auto& z = row(state, pos);
    const int next = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    if (next == Vocabulary::kEos) break;
    ids.push_back(next);
  }
  return vocab_.decode(ids);
}

double sequence_nll(const SequenceModel& model, const SftExample& sample) {
  double nll = 0.0;
  for (std::size_t i = 0; i < sample.tokens.size(); ++i) {
    const int tok = sample.tokens[i];
    if (tok < 0 || tok >= model.vocabulary().size()) {
      throw ContractError("token id " + std::to_string(tok) + " is out of vocabulary");
    }
    nll -= model.next_log_probs(sample.state, static_cast<int>(i))[static_cast<std::size_t>(tok)];
  }
  return nll;
}

double mean_sequence_nll(const SequenceModel& model, std::span<const SftExample> dataset) {
  if (dataset.empty()) return 0.0;
  double sum = 0.0;
  for (const SftExample& s : dataset) sum += sequence_nll(model, s);
  return sum / static_cast<double>(dataset.size());
}

SequenceModel run_pa_sft(SequenceModel model, std::span<const SftExample> dataset, int epochs,
                         double learning_rate) {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (dataset.empty() || epochs == 0) return model;
  for (const SftExample& s : dataset) (void)sequence_nll(model, s);  // validates ids

  const double scale = learning_rate / static_cast<double>(dataset.size());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    // Gradient of the mean NLL w.r.t. a row is (softmax - onehot) / N summed
    // over every (sample, position) that reads it; rows are shared only when
    // positions clamp at max_length.
    std::map<std::pair<int, int>, std::vector<double>> grads;
    for (const SftExample& s : dataset) {
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const int pos = static_cast<int>(i);
        std::vector<double> p = model.row(s.state, pos);
        softmax_in_place(p);
        p[static_cast<std::size_t>(s.tokens[i])] -= 1.0;
        const std::pair<int, int> key{s.state, std::min(pos, model.max_length() - 1)};
        auto [it, inserted] = grads.try_emplace(key, p);
        if (!inserted) {
          for (std::size_t v = 0; v < it->second.size(); ++v) it->second[v] += p[v];
        }
      }
    }
    for (auto& [key, g] : grads) {
      auto& z = model.row(key.first, key.second);
      for (std::size_t v = 0; v < z.size(); ++v) z[v] -= scale * g[v];
    }
  }
  return model;
}

ToyPolicy policy_from_sequence_model(const SequenceModel& model,
                                     const ToyPolicy::ActionTable& actions,
                                     std::span<const int> model_state_of) {
  if (model_state_of.size() != actions.size()) {
    throw ContractError("need one model state per policy state");
  }
  LogitTable logits;
  for (std::size_t s = 0; s < actions.size(); ++s) {
    std::vector<double> row;
    for (const std::string& candidate : actions[s]) {
      const SftExample ex{model_state_of[s], model.vocabulary().encode(candidate)};
      row.push_back(-sequence_nll(model, ex) / static_cast<double>(ex.tokens.size()));
    }
    logits.push_back(std::move(row));
  }
  return ToyPolicy(actions, std::move(logits));
}

}  // namespace scgrpo
