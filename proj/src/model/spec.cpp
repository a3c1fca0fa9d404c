#include "cmlab/model/spec.hpp"

#include <stdexcept>
#include <string>

namespace cmlab::model {

std::string_view task_name(TaskKind t) {
  switch (t) {
    case TaskKind::LanguageModel: return "lm";
    case TaskKind::Classifier: return "classifier";
    case TaskKind::Translation: return "translation";
  }
  return "?";
}

TaskKind parse_task(std::string_view name) {
  for (auto t : {TaskKind::LanguageModel, TaskKind::Classifier, TaskKind::Translation})
    if (task_name(t) == name) return t;
  throw std::invalid_argument("unknown task '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
  if (n_layers <= 0) throw std::invalid_argument("ModelSpec: n_layers must be positive");
  if (n_heads <= 0) throw std::invalid_argument("ModelSpec: n_heads must be positive");
  if (d_model <= 0 || d_model % n_heads != 0)
    throw std::invalid_argument("ModelSpec: d_model must be a positive multiple of n_heads");
  if (d_ff <= 0) throw std::invalid_argument("ModelSpec: d_ff must be positive");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw std::invalid_argument("ModelSpec: dropout_p must lie in [0, 1)");
  pe.validate();
  if (pe.d_model != d_model) throw std::invalid_argument("ModelSpec: pe.d_model must equal d_model");
  if (pe.is_rotary() && head_dim() % 2 != 0)
    throw std::invalid_argument("ModelSpec: rotary variants need an even head dimension");
  if (unigram_vocab == 0) throw std::invalid_argument("ModelSpec: unigram_vocab must be positive");
  if (use_bigram_stream && bigram_vocab == 0)
    throw std::invalid_argument("ModelSpec: bigram_vocab must be positive when the bigram stream is on");
  if (task == TaskKind::Classifier && n_classes < 2)
    throw std::invalid_argument("ModelSpec: a classifier needs at least two classes");
  if (task == TaskKind::Translation && target_vocab == 0)
    throw std::invalid_argument("ModelSpec: target_vocab must be positive for translation");
  if (tie_embeddings && task != TaskKind::LanguageModel)
    throw std::invalid_argument("ModelSpec: tie_embeddings applies to the language model only");
}

nlohmann::ordered_json to_json(const ModelSpec& s) {
  nlohmann::ordered_json j;
  j["task"] = task_name(s.task);
  j["n_layers"] = s.n_layers;
  j["n_heads"] = s.n_heads;
  j["d_model"] = s.d_model;
  j["d_ff"] = s.d_ff;
  j["dropout_p"] = s.dropout_p;
  j["pe"] = posenc::to_json(s.pe);
  j["unigram_vocab"] = s.unigram_vocab;
  j["bigram_vocab"] = s.bigram_vocab;
  j["target_vocab"] = s.target_vocab;
  j["n_classes"] = s.n_classes;
  j["use_bigram_stream"] = s.use_bigram_stream;
  j["tie_embeddings"] = s.tie_embeddings;
  return j;
}

ModelSpec model_spec_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("ModelSpec: expected an object");
  ModelSpec s;
  nlohmann::ordered_json pe_json;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "task") s.task = parse_task(value.get<std::string>());
      else if (key == "n_layers") s.n_layers = value.get<int>();
      else if (key == "n_heads") s.n_heads = value.get<int>();
      else if (key == "d_model") s.d_model = value.get<int>();
      else if (key == "d_ff") s.d_ff = value.get<int>();
      else if (key == "dropout_p") s.dropout_p = value.get<double>();
      else if (key == "pe") pe_json = value;
      else if (key == "unigram_vocab") s.unigram_vocab = value.get<std::size_t>();
      else if (key == "bigram_vocab") s.bigram_vocab = value.get<std::size_t>();
      else if (key == "target_vocab") s.target_vocab = value.get<std::size_t>();
      else if (key == "n_classes") s.n_classes = value.get<std::size_t>();
      else if (key == "use_bigram_stream") s.use_bigram_stream = value.get<bool>();
      else if (key == "tie_embeddings") s.tie_embeddings = value.get<bool>();
      else throw std::invalid_argument("ModelSpec: unknown key '" + key + "'");
    } catch (const nlohmann::json::type_error&) {
      throw std::invalid_argument("ModelSpec: wrong type for key '" + key + "'");
    }
  }
  if (!pe_json.is_null()) {
    if (!pe_json.contains("d_model")) pe_json["d_model"] = s.d_model;
    s.pe = posenc::pe_config_from_json(pe_json);
  } else {
    s.pe.d_model = s.d_model;
  }
  return s;
}

}  // namespace cmlab::model
