#include "cmlab/tasks/vocab.hpp"

#include <algorithm>
#include <stdexcept>

namespace cmlab::tasks {

Vocab::Vocab() {
  for (const char* s : {"<pad>", "<unk>", "<bos>", "<eos>"}) push(s);
}

void Vocab::push(std::string w) {
  if (index_.count(w)) throw std::invalid_argument("Vocab: duplicate word '" + w + "'");
  index_.emplace(w, static_cast<int>(words_.size()));
  words_.push_back(std::move(w));
}

Vocab Vocab::build(const std::map<std::string, std::size_t>& counts, std::size_t min_count) {
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (const auto& [w, c] : items)
    if (c >= min_count && !v.contains(w)) v.push(w);
  return v;
}

Vocab Vocab::build(std::span<const std::string> words, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& w : words) ++counts[w];
  return build(counts, min_count);
}

int Vocab::id(std::string_view word) const {
  const auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::word(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size())
    throw std::out_of_range("Vocab: id " + std::to_string(id) + " out of range");
  return words_[static_cast<std::size_t>(id)];
}

bool Vocab::contains(std::string_view word) const { return index_.find(word) != index_.end(); }

nlohmann::ordered_json Vocab::to_json() const { return words_; }

Vocab Vocab::from_json(const nlohmann::ordered_json& j) {
  const auto words = j.get<std::vector<std::string>>();
  Vocab v;
  if (words.size() < v.size()) throw std::invalid_argument("Vocab: missing reserved entries");
  for (std::size_t i = 0; i < v.size(); ++i)
    if (words[i] != v.words_[i]) throw std::invalid_argument("Vocab: reserved entries out of order");
  for (std::size_t i = v.size(); i < words.size(); ++i) v.push(words[i]);
  return v;
}

}  // namespace cmlab::tasks
