#include "cmlab/tasks/word2vec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cmlab/posenc/kernels.hpp"
#include "cmlab/util/rng.hpp"

namespace cmlab::tasks {

using json = nlohmann::ordered_json;

void SgnsConfig::validate() const {
  if (dims == 0) throw std::invalid_argument("word2vec: dims must be positive");
  if (window == 0) throw std::invalid_argument("word2vec: window must be positive");
  if (negative_samples == 0) throw std::invalid_argument("word2vec: negative_samples must be positive");
  if (epochs == 0) throw std::invalid_argument("word2vec: epochs must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("word2vec: learning_rate must be positive");
}

json to_json(const SgnsConfig& c) {
  json j;
  j["dims"] = c.dims;
  j["window"] = c.window;
  j["negative_samples"] = c.negative_samples;
  j["epochs"] = c.epochs;
  j["learning_rate"] = c.learning_rate;
  return j;
}

SgnsConfig sgns_config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("word2vec: expected an object");
  SgnsConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "dims") c.dims = value.get<std::size_t>();
      else if (key == "window") c.window = value.get<std::size_t>();
      else if (key == "negative_samples") c.negative_samples = value.get<std::size_t>();
      else if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else throw std::invalid_argument("word2vec: unknown key '" + key + "'");
    } catch (const json::type_error&) {
      throw std::invalid_argument("word2vec: wrong type for key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

std::size_t EmbeddingTable::row(std::string_view word) const {
  const auto it = std::find(words.begin(), words.end(), word);
  return it == words.end() ? unk_row() : static_cast<std::size_t>(it - words.begin());
}

std::vector<double> EmbeddingTable::vector(std::string_view word) const {
  const auto r = vectors.row(row(word));
  return {r.begin(), r.end()};
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

EmbeddingTable train_sgns(const std::vector<std::vector<std::string>>& sentences, const SgnsConfig& cfg,
                          std::uint64_t seed) {
  cfg.validate();
  std::map<std::string, std::size_t> counts;
  for (const auto& s : sentences)
    for (const auto& w : s) ++counts[w];
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (items.size() < cfg.negative_samples)
    throw std::invalid_argument("word2vec: vocabulary of " + std::to_string(items.size()) +
                                " words is smaller than negative_samples = " + std::to_string(cfg.negative_samples));

  EmbeddingTable t;
  std::map<std::string, int> index;
  for (const auto& [w, c] : items) {
    index[w] = static_cast<int>(t.words.size());
    t.words.push_back(w);
  }
  const std::size_t v = t.words.size(), d = cfg.dims;
  Rng rng(derive_seed(seed, "word2vec"));
  nn::Tensor in(v, d), out(v, d);
  for (auto& e : in.values()) e = rng.uniform(-0.5, 0.5) / static_cast<double>(d);

  std::vector<double> cumulative(v);
  double acc = 0;
  for (std::size_t i = 0; i < v; ++i) cumulative[i] = acc += std::pow(static_cast<double>(items[i].second), 0.75);
  auto draw_negative = [&] {
    const double u = rng.uniform() * acc;
    return static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
  };

  std::size_t total_tokens = 0;
  for (const auto& s : sentences) total_tokens += s.size();
  const double total_work = static_cast<double>(total_tokens * cfg.epochs);
  double done = 0;
  std::vector<double> grad_in(d);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss = 0;
    std::size_t pairs = 0;
    for (const auto& s : sentences) {
      for (std::size_t c = 0; c < s.size(); ++c, done += 1) {
        const double lr = cfg.learning_rate * std::max(1e-4, 1.0 - done / total_work);
        const auto center = static_cast<std::size_t>(index[s[c]]);
        const std::size_t lo = c >= cfg.window ? c - cfg.window : 0;
        const std::size_t hi = std::min(s.size() - 1, c + cfg.window);
        for (std::size_t o = lo; o <= hi; ++o) {
          if (o == c) continue;
          std::fill(grad_in.begin(), grad_in.end(), 0.0);
          auto update = [&](std::size_t target, double label) {
            double dot = 0;
            for (std::size_t k = 0; k < d; ++k) dot += in(center, k) * out(target, k);
            const double p = sigmoid(dot);
            loss -= label > 0 ? std::log(std::max(p, 1e-12)) : std::log(std::max(1.0 - p, 1e-12));
            const double g = lr * (label - p);
            for (std::size_t k = 0; k < d; ++k) {
              grad_in[k] += g * out(target, k);
              out(target, k) += g * in(center, k);
            }
          };
          update(static_cast<std::size_t>(index[s[o]]), 1.0);
          for (std::size_t n = 0; n < cfg.negative_samples; ++n) {
            const std::size_t neg = draw_negative();
            if (neg == static_cast<std::size_t>(index[s[o]])) continue;
            update(neg, 0.0);
          }
          for (std::size_t k = 0; k < d; ++k) in(center, k) += grad_in[k];
          ++pairs;
        }
      }
    }
    t.epoch_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
  }

  t.vectors = nn::Tensor(v + 1, d);
  for (std::size_t i = 0; i < v; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      t.vectors(i, k) = in(i, k);
      t.vectors(v, k) += in(i, k) / static_cast<double>(v);
    }
  return t;
}

PretrainedEmbeddings pretrain_embeddings(std::span<const corpus::Utterance> corpus, const SgnsConfig& cfg,
                                         std::uint64_t seed) {
  std::vector<std::vector<std::string>> uni, bi;
  for (const auto& u : corpus) {
    uni.push_back(u.surfaces());
    std::vector<std::string> b;
    for (const auto& g : posenc::bigramize(u.tokens)) b.push_back(g.surface);
    if (!b.empty()) bi.push_back(std::move(b));
  }
  PretrainedEmbeddings p;
  p.unigrams = train_sgns(uni, cfg, derive_seed(seed, "unigram"));
  p.bigrams = train_sgns(bi, cfg, derive_seed(seed, "bigram"));
  return p;
}

void load_embeddings(nn::Tensor& matrix, const Vocab& vocab, const EmbeddingTable& table) {
  if (matrix.cols() != table.vectors.cols())
    throw std::invalid_argument("pretrained embedding width " + std::to_string(table.vectors.cols()) +
                                " differs from the model width " + std::to_string(matrix.cols()));
  if (matrix.rows() != vocab.size()) throw std::invalid_argument("embedding matrix rows differ from the vocabulary");
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    const int i = static_cast<int>(id);
    if (i == Vocab::kPad || i == Vocab::kBos || i == Vocab::kEos) continue;
    const std::size_t r = i == Vocab::kUnk ? table.unk_row() : table.row(vocab.word(i));
    std::copy_n(table.vectors.row(r).data(), matrix.cols(), matrix.row(id).data());
  }
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(std::max(na * nb, 1e-300));
}

}  // namespace cmlab::tasks
