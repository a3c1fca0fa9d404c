#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cmlab/cli/commands.hpp"
#include "cmlab/util/errors.hpp"
#include "cmlab/util/fsio.hpp"

using namespace cmlab;
using namespace cmlab::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("cmlab_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const std::string& name, const json& j) {
  const auto p = dir / name;
  write_file_atomic(p.string(), j.dump(2));
  return p.string();
}

int run(const std::string& cmd, const std::string& config, const fs::path& out, std::string* err = nullptr,
        std::optional<std::uint64_t> seed = std::nullopt) {
  std::ostringstream e;
  const int code = run_cli(cmd, config, seed, out.string(), e);
  if (err) *err = e.str();
  return code;
}

std::vector<std::string> csv_rows(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#') rows.push_back(line);
  return rows;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

json small_model() {
  return {{"n_layers", 1}, {"n_heads", 2}, {"d_model", 16}, {"d_ff", 32}, {"dropout_p", 0.1}};
}

// Synthetic corpus with labels and translations, split into train/test.
fs::path synth_corpus(const std::string& name) {
  const auto dir = fresh_dir(name);
  json cfg{{"n_utterances", 120},
           {"min_len", 4},
           {"max_len", 8},
           {"sp_density", 0.3},
           {"vocab", {{"l1", 30}, {"l2", 30}, {"post_sp", 5}, {"shared", 5}}},
           {"shared_fraction", 0.2},
           {"labels", {"positive", "negative", "neutral"}},
           {"translation", "rule"},
           {"split", {{"train", 4}, {"test", 1}}}};
  EXPECT_EQ(run("synth", write_config(dir, "synth.json", cfg), dir), 0);
  return dir;
}

}  // namespace

TEST(CliConfig, UnknownKeysAndTypesRejected) {
  const auto dir = fresh_dir("keys");
  std::string err;
  EXPECT_EQ(run("synth", write_config(dir, "a.json", {{"n_utterance", 5}}), dir, &err), kExitConfig);
  EXPECT_NE(err.find("n_utterance"), std::string::npos);
  EXPECT_EQ(run("synth", write_config(dir, "b.json", {{"n_utterances", "five"}}), dir), kExitConfig);
  EXPECT_EQ(run("synth", write_config(dir, "c.json", {{"n_utterances", -5}}), dir), kExitConfig);
  EXPECT_EQ(run("analyze", write_config(dir, "d.json", {{"corpus", "missing.jsonl"}}), dir), kExitConfig);
  EXPECT_EQ(run("synth", (dir / "nope.json").string(), dir), kExitConfig);
  write_file_atomic((dir / "bad.json").string(), "{not json");
  EXPECT_EQ(run("synth", (dir / "bad.json").string(), dir), kExitConfig);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(CliConfig, SeedOverrideEntersHash) {
  const auto a = run_from_json("synth", json{{"seed", 3}}, ".", std::nullopt, ".");
  const auto b = run_from_json("synth", json::object(), ".", 3, ".");
  const auto c = run_from_json("synth", json::object(), ".", 4, ".");
  EXPECT_EQ(a.seed, 3u);
  EXPECT_EQ(a.config_hash, b.config_hash);
  EXPECT_NE(b.config_hash, c.config_hash);
  EXPECT_EQ(run_from_json("synth", json::object(), ".", std::nullopt, ".").seed, kDefaultSeed);
}

TEST(CliConfig, CsvQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field(","), "\",\"");
  EXPECT_EQ(csv_field("a\"b"), "\"a\"\"b\"");
}

TEST(CliAnalyze, MonolingualCorpusLandsInDiscardBin) {
  const auto dir = fresh_dir("mono");
  std::string lines;
  for (int i = 0; i < 40; ++i)
    lines += "{\"tokens\":[{\"w\":\"w" + std::to_string(i) + "\",\"t\":\"L1\"},{\"w\":\"x" + std::to_string(i % 7) +
             "\",\"t\":\"L1\"}]}\n";
  write_file_atomic((dir / "mono.jsonl").string(), lines);
  ASSERT_EQ(run("analyze", write_config(dir, "a.json", {{"corpus", "mono.jsonl"}}), dir / "out"), 0);
  const auto report = json::parse(read_file((dir / "out" / "analyze_report.json").string()));
  EXPECT_EQ(report["histogram"]["discarded_cmi0"], 40);
  EXPECT_EQ(report["histogram"]["total"], 0);
  EXPECT_EQ(report["schema_version"], 1);
  const auto heaps = read_file((dir / "out" / "heaps.csv").string());
  EXPECT_NE(heaps.find("# K="), std::string::npos);
  EXPECT_NE(heaps.find("# beta="), std::string::npos);
  EXPECT_NE(heaps.find("# residual="), std::string::npos);
}

TEST(CliAnalyze, MalformedLineLeavesNoOutputs) {
  const auto dir = fresh_dir("malformed");
  write_file_atomic((dir / "c.jsonl").string(),
                    "{\"tokens\":[{\"w\":\"a\",\"t\":\"L1\"}]}\n{\"tokens\":[{\"w\":\"a\",\"t\":\"XX\"}]}\n");
  std::string err;
  EXPECT_EQ(run("analyze", write_config(dir, "a.json", {{"corpus", "c.jsonl"}}), dir / "out", &err), kExitData);
  EXPECT_NE(err.find("line 2"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(CliSynth, TableMixRoundTripsThroughAnalyze) {
  const auto dir = fresh_dir("reference");
  json cfg{{"n_utterances", 400}, {"min_len", 8}, {"max_len", 24}, {"target_mix", "reference"}};
  ASSERT_EQ(run("synth", write_config(dir, "s.json", cfg), dir), 0);
  ASSERT_EQ(run("analyze", write_config(dir, "a.json", {{"corpus", "corpus.jsonl"}, {"lexicon", "lexicon.tsv"}}),
                dir / "an"),
            0);
  const auto report = json::parse(read_file((dir / "an" / "analyze_report.json").string()));
  const double ref[] = {8.05, 18.9, 25.9, 26.0, 13.1, 8.05};
  for (std::size_t b = 0; b < 6; ++b) EXPECT_NEAR(report["histogram"]["buckets"][b]["percent"].get<double>(), ref[b], 3.0);
}

TEST(CliTrain, LmTrainAndEvalAreByteDeterministic) {
  const auto data = synth_corpus("lmdet");
  json train{{"train_corpus", "train.jsonl"},
             {"model", small_model()},
             {"train", {{"steps", 12}, {"batch_size", 4}, {"warmup_steps", 4}, {"log_every", 4}, {"checkpoint_every", 5}}}};
  const auto cfg = write_config(data, "train.json", train);
  ASSERT_EQ(run("train-lm", cfg, data / "r1"), 0);
  ASSERT_EQ(run("train-lm", cfg, data / "r2"), 0);
  for (const char* f : {"train_report.json", "train_log.csv", "lm_checkpoint.json"})
    EXPECT_EQ(read_file((data / "r1" / f).string()), read_file((data / "r2" / f).string())) << f;
  ASSERT_EQ(run("train-lm", cfg, data / "r3", nullptr, 99), 0);
  EXPECT_NE(read_file((data / "r1" / "train_log.csv").string()), read_file((data / "r3" / "train_log.csv").string()));

  json eval{{"checkpoint", "r1/lm_checkpoint.json"}, {"eval_corpus", "test.jsonl"}};
  const auto ecfg = write_config(data, "eval.json", eval);
  ASSERT_EQ(run("eval-ppl", ecfg, data / "e1"), 0);
  ASSERT_EQ(run("eval-ppl", ecfg, data / "e2"), 0);
  const auto csv = read_file((data / "e1" / "perplexity.csv").string());
  EXPECT_EQ(csv, read_file((data / "e2" / "perplexity.csv").string()));
  EXPECT_EQ(read_file((data / "e1" / "perplexity_report.json").string()),
            read_file((data / "e2" / "perplexity_report.json").string()));
  const auto rows = csv_rows(csv);
  ASSERT_GE(rows.size(), 7u);
  const char* expected[] = {"bucket", "0-10", "11-20", "21-30", "31-40", "41-50", "Average"};
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(split(rows[i], ',')[0], expected[i]);

  json wrong{{"checkpoint", "r1/lm_checkpoint.json"}, {"eval_corpus", "test.jsonl"}};
  EXPECT_EQ(run("eval-sa", write_config(data, "wrong.json", wrong), data / "e3"), kExitConfig);
}

TEST(CliTrain, ClassifierAndTranslationRoundTrip) {
  const auto data = synth_corpus("samt");
  json tcfg{{"steps", 10}, {"batch_size", 4}, {"warmup_steps", 4}};
  ASSERT_EQ(run("train-sa", write_config(data, "sa.json", {{"train_corpus", "train.jsonl"}, {"model", small_model()}, {"train", tcfg}}),
                data / "sa"),
            0);
  const auto sa_report = json::parse(read_file((data / "sa" / "train_report.json").string()));
  EXPECT_TRUE(sa_report.contains("majority_baseline"));
  ASSERT_EQ(run("eval-sa", write_config(data, "esa.json", {{"checkpoint", "sa/sa_checkpoint.json"}, {"eval_corpus", "test.jsonl"}}),
                data / "esa"),
            0);
  const auto sa = json::parse(read_file((data / "esa" / "sa_report.json").string()));
  EXPECT_GE(sa["scores"]["macro_f1"].get<double>(), 0.0);
  EXPECT_LE(sa["scores"]["macro_f1"].get<double>(), 1.0);

  ASSERT_EQ(run("train-mt", write_config(data, "mt.json", {{"train_corpus", "train.jsonl"}, {"model", small_model()}, {"train", tcfg}}),
                data / "mt"),
            0);
  ASSERT_EQ(run("eval-mt",
                write_config(data, "emt.json",
                             {{"checkpoint", "mt/mt_checkpoint.json"}, {"eval_corpus", "test.jsonl"}, {"max_len", 10}, {"beam_width", 2}}),
                data / "emt"),
            0);
  const auto mt = json::parse(read_file((data / "emt" / "bleu_report.json").string()));
  EXPECT_GE(mt["scores"]["bleu"].get<double>(), 0.0);
  EXPECT_LE(mt["scores"]["bleu"].get<double>(), 100.0);
}

TEST(CliTrain, LabelOutsideSetIsDataError) {
  const auto data = synth_corpus("badlabel");
  json cfg{{"train_corpus", "train.jsonl"}, {"labels", {"positive", "negative"}}, {"model", small_model()}, {"train", {{"steps", 2}}}};
  EXPECT_EQ(run("train-sa", write_config(data, "sa.json", cfg), data / "o"), kExitData);
}

TEST(CliComparePe, RowsCapabilitiesAndDelta) {
  const auto data = synth_corpus("compare");
  json cfg{{"task", "lm"},
           {"train_corpus", "train.jsonl"},
           {"eval_corpus", "test.jsonl"},
           {"variants", {"ROTARY", "SP_ROTARY"}},
           {"model", small_model()},
           {"train", {{"steps", 6}, {"batch_size", 4}, {"warmup_steps", 3}}}};
  const auto path = write_config(data, "cmp.json", cfg);
  ASSERT_EQ(run("compare-pe", path, data / "c1"), 0);
  ASSERT_EQ(run("compare-pe", path, data / "c2"), 0);
  const auto csv = read_file((data / "c1" / "compare_pe.csv").string());
  EXPECT_EQ(csv, read_file((data / "c2" / "compare_pe.csv").string()));
  const auto rows = csv_rows(csv);
  ASSERT_EQ(rows.size(), 3u);
  const auto header = split(rows[0], ',');
  for (const char* col : {"sin_cos", "index", "dynamic", "spi", "relative", "rm", "sprm", "delta"})
    EXPECT_NE(std::find(header.begin(), header.end(), col), header.end()) << col;
  const auto first = split(rows[1], ','), second = split(rows[2], ',');
  EXPECT_EQ(first[0], "ROTARY");
  EXPECT_EQ(second[0], "SP_ROTARY");
  EXPECT_EQ(first.back(), "0.0000");
  const double delta = std::stod(second.back());
  const double diff = std::stod(second[second.size() - 2]) - std::stod(first[first.size() - 2]);
  EXPECT_NEAR(delta, diff, 2e-4);
  EXPECT_TRUE(fs::exists(data / "c1" / "compare_pe_timings.csv"));
  EXPECT_EQ(csv.find("seconds"), std::string::npos);
}

TEST(CliComparePe, SpVariantOnUntaggedCorpusRejected) {
  const auto dir = fresh_dir("untagged");
  std::string lines;
  for (int i = 0; i < 10; ++i) lines += "{\"tokens\":[{\"w\":\"a\"},{\"w\":\"b\"},{\"w\":\"c\"}]}\n";
  write_file_atomic((dir / "u.jsonl").string(), lines);
  json cfg{{"task", "lm"},
           {"train_corpus", "u.jsonl"},
           {"eval_corpus", "u.jsonl"},
           {"variants", {"ROTARY", "SP_ROTARY"}},
           {"model", small_model()},
           {"train", {{"steps", 2}}}};
  std::string err;
  EXPECT_EQ(run("compare-pe", write_config(dir, "c.json", cfg), dir / "out", &err), kExitConfig);
  EXPECT_NE(err.find("SP_ROTARY"), std::string::npos);
  cfg["variants"] = {"ROTARY"};
  EXPECT_EQ(run("compare-pe", write_config(dir, "d.json", cfg), dir / "out"), 0);
}

TEST(CliDumpAttention, RowsSumToOneAndSpMarked) {
  const auto data = synth_corpus("attn");
  json train{{"train_corpus", "train.jsonl"}, {"model", small_model()}, {"train", {{"steps", 4}, {"batch_size", 2}}}};
  ASSERT_EQ(run("train-lm", write_config(data, "t.json", train), data / "m"), 0);
  json cfg{{"checkpoint", "m/lm_checkpoint.json"},
           {"utterance", "haaa haab eaaa eaab haac"},
           {"lexicon", "lexicon.tsv"},
           {"layer", 0},
           {"head", 1},
           {"stats_corpus", "test.jsonl"}};
  ASSERT_EQ(run("dump-attention", write_config(data, "a.json", cfg), data / "a"), 0);
  const auto rows = csv_rows(read_file((data / "a" / "attention.csv").string()));
  ASSERT_EQ(rows.size(), 7u);
  const auto header = split(rows[0], ',');
  EXPECT_EQ(header[1], "<bos>");
  EXPECT_EQ(header[2], "haaa");
  EXPECT_EQ(header[4], "eaaa*");
  EXPECT_EQ(header[6], "haac*");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split(rows[i], ',');
    double sum = 0;
    for (std::size_t j = 1; j < cells.size(); ++j) sum += std::stod(cells[j]);
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
  EXPECT_TRUE(fs::exists(data / "a" / "attention_stats.json"));

  cfg["layer"] = 1;
  EXPECT_EQ(run("dump-attention", write_config(data, "b.json", cfg), data / "b"), kExitConfig);
  cfg["layer"] = 0;
  cfg["head"] = 2;
  EXPECT_EQ(run("dump-attention", write_config(data, "c.json", cfg), data / "c"), kExitConfig);
}

TEST(CliRun, UnknownCommandIsUsageError) {
  const auto dir = fresh_dir("unknown");
  EXPECT_EQ(run("frobnicate", write_config(dir, "x.json", json::object()), dir), kExitConfig);
}
