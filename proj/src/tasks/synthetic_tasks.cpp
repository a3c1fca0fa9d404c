#include "cmlab/tasks/synthetic_tasks.hpp"

#include <stdexcept>

#include "cmlab/util/fsio.hpp"

namespace cmlab::tasks {

std::string switch_cued_label(const corpus::Utterance& u, std::span<const std::string> labels) {
  if (labels.empty()) throw std::invalid_argument("empty label set");
  if (u.sp_indices.empty() || u.sp_indices.front() + 1 >= u.size()) return labels.back();
  const auto& cue = u.tokens[u.sp_indices.front() + 1].surface;
  const auto h = std::stoull(fnv1a_hex(cue), nullptr, 16);
  return labels[h % labels.size()];
}

void attach_switch_cued_labels(std::vector<corpus::Utterance>& corpus, std::span<const std::string> labels) {
  for (auto& u : corpus) u.label = switch_cued_label(u, labels);
}

std::string synthetic_translation(const corpus::Utterance& u, bool copy) {
  std::string out;
  for (const auto& t : u.tokens) {
    std::string w = t.surface;
    if (!copy && t.tag == corpus::LanguageTag::L1 && !w.empty() && w.front() == 'h') w.front() = 'e';
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

void attach_translations(std::vector<corpus::Utterance>& corpus, bool copy) {
  for (auto& u : corpus) u.target = synthetic_translation(u, copy);
}

}  // namespace cmlab::tasks
