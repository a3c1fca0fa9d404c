#include "cmlab/corpus/corpus_io.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "cmlab/corpus/text.hpp"
#include "cmlab/util/errors.hpp"

namespace cmlab::corpus {

using json = nlohmann::ordered_json;

namespace {

Utterance parse_line(const std::string& line, std::size_t line_no, const Lexicon* lexicon, const CmiWeights& weights,
                     MissingTags missing) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("corpus: invalid JSON: ") + e.what(), line_no);
  }
  if (!obj.is_object()) throw DataError("corpus: expected a JSON object", line_no);
  for (const auto& [key, value] : obj.items()) {
    if (key != "tokens" && key != "label" && key != "target")
      throw DataError("corpus: unknown field '" + key + "'", line_no);
  }
  if (!obj.contains("tokens") || !obj["tokens"].is_array() || obj["tokens"].empty())
    throw DataError("corpus: 'tokens' must be a non-empty array", line_no);

  std::vector<std::string> raw;
  std::vector<std::optional<LanguageTag>> given;
  for (const auto& t : obj["tokens"]) {
    if (!t.is_object() || !t.contains("w") || !t["w"].is_string())
      throw DataError("corpus: each token needs a string field 'w'", line_no);
    raw.push_back(t["w"].get<std::string>());
    if (t.contains("t")) {
      if (!t["t"].is_string()) throw DataError("corpus: tag 't' must be a string", line_no);
      try {
        given.push_back(parse_tag(t["t"].get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw DataError(std::string("corpus: ") + e.what(), line_no);
      }
    } else {
      given.emplace_back();
    }
  }

  std::vector<Token> tokens;
  const bool needs_tagger = std::any_of(given.begin(), given.end(), [](const auto& g) { return !g; });
  try {
    if (needs_tagger) {
      if (!lexicon && missing == MissingTags::Reject)
        throw DataError("corpus: untagged token and no lexicon supplied", line_no);
      if (lexicon) {
        tokens = tag_tokens(raw, *lexicon);
      } else {
        for (std::size_t i = 0; i < raw.size(); ++i) {
          if (raw[i].empty() || contains_whitespace(raw[i]))
            throw std::invalid_argument("malformed token at position " + std::to_string(i));
          tokens.push_back({normalize_surface(raw[i]), LanguageTag::Other});
        }
      }
      for (std::size_t i = 0; i < tokens.size(); ++i)
        if (given[i]) tokens[i].tag = *given[i];
    } else {
      for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i].empty() || contains_whitespace(raw[i]))
          throw std::invalid_argument("malformed token at position " + std::to_string(i));
        tokens.push_back({normalize_surface(raw[i]), *given[i]});
      }
    }
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("corpus: ") + e.what(), line_no);
  }

  Utterance u = make_utterance(std::move(tokens), weights);
  if (obj.contains("label")) {
    if (!obj["label"].is_string()) throw DataError("corpus: 'label' must be a string", line_no);
    u.label = obj["label"].get<std::string>();
  }
  if (obj.contains("target")) {
    if (!obj["target"].is_string()) throw DataError("corpus: 'target' must be a string", line_no);
    u.target = obj["target"].get<std::string>();
  }
  return u;
}

}  // namespace

std::vector<Utterance> read_corpus(std::istream& in, const Lexicon* lexicon, const CmiWeights& weights,
                                   MissingTags missing) {
  weights.validate();
  std::vector<Utterance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_line(line, line_no, lexicon, weights, missing));
  }
  return out;
}

std::vector<Utterance> load_corpus(const std::string& path, const Lexicon* lexicon, const CmiWeights& weights,
                                   MissingTags missing) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus '" + path + "'");
  return read_corpus(in, lexicon, weights, missing);
}

bool has_language_tags(std::span<const Utterance> corpus) {
  for (const auto& u : corpus)
    for (const auto& t : u.tokens)
      if (is_language(t.tag)) return true;
  return false;
}

std::string utterance_to_json_line(const Utterance& u) {
  json obj;
  json toks = json::array();
  for (const auto& t : u.tokens) toks.push_back({{"w", t.surface}, {"t", std::string(tag_name(t.tag))}});
  obj["tokens"] = std::move(toks);
  if (u.label) obj["label"] = *u.label;
  if (u.target) obj["target"] = *u.target;
  return obj.dump();
}

void write_corpus(std::ostream& os, std::span<const Utterance> corpus) {
  for (const auto& u : corpus) os << utterance_to_json_line(u) << '\n';
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

void write_histogram_csv(std::ostream& os, const CmiHistogram& h) {
  os << "# mean_cmi=" << (h.mean_cmi ? format_fixed(*h.mean_cmi, 2) : std::string("undefined")) << '\n';
  os << "# total=" << h.total << '\n';
  os << "# discarded_cmi0=" << h.discarded_zero << '\n';
  os << "bucket,count,percent\n";
  for (std::size_t b = 0; b < kCmiBucketCount; ++b)
    os << kCmiBucketLabels[b] << ',' << h.buckets[b] << ',' << format_fixed(h.percent(b), 2) << '\n';
}

void write_heaps_csv(std::ostream& os, const HeapsFit& fit, std::span<const HeapsSample> samples) {
  os << "# K=" << format_fixed(fit.K, 6) << '\n';
  os << "# beta=" << format_fixed(fit.beta, 6) << '\n';
  os << "# residual=" << format_fixed(fit.residual, 6) << '\n';
  os << "n,v,fit_v\n";
  for (const auto& s : samples)
    os << format_fixed(s.n, 0) << ',' << format_fixed(s.v, 0) << ',' << format_fixed(fit.predict(s.n), 3) << '\n';
}

}  // namespace cmlab::corpus
