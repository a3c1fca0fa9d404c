#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace cmlab::tasks {

/// Word <-> id map with four reserved entries.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  Vocab();
  /// Words ordered by descending count, ties lexicographic; words below
  /// `min_count` map to <unk>.
  static Vocab build(const std::map<std::string, std::size_t>& counts, std::size_t min_count = 1);
  static Vocab build(std::span<const std::string> words, std::size_t min_count = 1);

  int id(std::string_view word) const;  // kUnk when absent
  const std::string& word(int id) const;
  std::size_t size() const { return words_.size(); }
  bool contains(std::string_view word) const;

  nlohmann::ordered_json to_json() const;  // the word list in id order
  static Vocab from_json(const nlohmann::ordered_json& j);

 private:
  void push(std::string w);
  std::vector<std::string> words_;
  std::map<std::string, int, std::less<>> index_;
};

}  // namespace cmlab::tasks
