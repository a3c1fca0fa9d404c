// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cmlab/cli/commands.hpp"
#include "cmlab/corpus/codemix.hpp"
#include "cmlab/corpus/stats.hpp"
#include "cmlab/corpus/text.hpp"
#include "cmlab/model/grad_suite.hpp"
#include "cmlab/nn/ops.hpp"
#include "cmlab/nn/params.hpp"
#include "cmlab/posenc/kernels.hpp"
#include "cmlab/posenc/rotary.hpp"
#include "cmlab/tasks/metrics.hpp"
#include "cmlab/util/fsio.hpp"
#include "cmlab/util/rng.hpp"

using namespace cmlab;
namespace fs = std::filesystem;
using cli::json;
using nn::Tensor;
using nn::Var;

namespace {

// Tolerances and budgets.
constexpr double kOrthoTol = 1e-9;
constexpr double kNormTol = 1e-12;
constexpr double kShiftTol = 1e-9;
constexpr double kComplexTol = 1e-9;
constexpr double kAngleTol = 1e-9;
constexpr double kGradTol = 1e-4;
constexpr double kGradEps = 1e-4;
constexpr double kHeapsNoisyTol = 0.02;
constexpr double kExactUlps = 2.0;
constexpr double kBleuOracleTol = 1e-6;
constexpr double kHistogramTol = 3.0;
constexpr std::size_t kMaxParams = 1000000;
constexpr std::size_t kMaxSteps = 20000;
// Mean held-out perplexity gain of SP_ROTARY over ROTARY on the SP-signal
// corpus. The first run measured 12.06; the bound keeps half of it.
constexpr double kPinnedMargin = 6.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += ", ";
    notes_ += s;
  }
  Outcome outcome() const { return {pass_, notes_ + (failures_.empty() ? "" : " | failed: " + failures_)}; }

 private:
  bool pass_ = true;
  std::string notes_;
  std::string failures_;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string fix(double v, int d = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", d, v);
  return buf;
}

Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng) { return nn::uniform_init(r, c, 1.0, rng); }

posenc::Projection random_projection(std::size_t d, Rng& rng) {
  return {nn::parameter(random_tensor(d, d, rng)), nn::parameter(random_tensor(d, d, rng))};
}

double pair_logit(const Tensor& x, std::size_t a, std::size_t b, int pa, int pb, const posenc::RotaryTable& table,
                  const posenc::Projection& proj) {
  Tensor two(2, x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    two(0, c) = x(a, c);
    two(1, c) = x(b, c);
  }
  const std::vector<int> pos{pa, pb};
  return posenc::attn_rotary(nn::constant(two), pos, table, proj).value()(0, 1);
}

// Dense d x d block-diagonal rotation matrix from 2x2 blocks.
std::vector<std::vector<double>> dense(const std::vector<posenc::Block2>& blocks) {
  const std::size_t d = 2 * blocks.size();
  std::vector<std::vector<double>> m(d, std::vector<double>(d, 0.0));
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    m[2 * k][2 * k] = blocks[k][0];
    m[2 * k][2 * k + 1] = blocks[k][1];
    m[2 * k + 1][2 * k] = blocks[k][2];
    m[2 * k + 1][2 * k + 1] = blocks[k][3];
  }
  return m;
}

Outcome rotary_suite() {
  Checker c;
  Rng rng(101);
  double ortho = 0, norm = 0, shift = 0, complex_err = 0;
  for (std::size_t d : {2u, 4u, 6u, 8u}) {
    const posenc::RotaryTable table(d, 10000.0, 64);
    const auto rm = posenc::build_sprm(posenc::SignPattern::all_positive(64), table);
    for (std::size_t m = 0; m < 64; ++m) {
      const auto mat = dense(rm[m]);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          double s = 0;
          for (std::size_t k = 0; k < d; ++k) s += mat[k][i] * mat[k][j];
          ortho = std::max(ortho, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
      std::vector<double> x(d);
      for (auto& v : x) v = rng.uniform(-3, 3);
      double n0 = 0, n1 = 0;
      for (double v : x) n0 += v * v;
      for (double v : posenc::apply_rotary(x, m, table)) n1 += v * v;
      norm = std::max(norm, std::abs(std::sqrt(n1) - std::sqrt(n0)) / std::sqrt(n0));
    }
    // Relative shift: logit(i + s, j + s) == logit(i, j) for every pair within 16.
    const auto proj = random_projection(d, rng);
    const Tensor x = random_tensor(2, d, rng);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        const double ref = pair_logit(x, 0, 1, i, j, table, proj);
        for (int s = 1; i + s < 16 && j + s < 16; ++s)
          shift = std::max(shift, std::abs(pair_logit(x, 0, 1, i + s, j + s, table, proj) - ref));
      }
  }
  {
    const posenc::RotaryTable table(2, 10000.0, 16);
    const double theta = table.thetas()[0];
    const auto proj = random_projection(2, rng);
    const Var x = nn::constant(random_tensor(16, 2, rng));
    const auto out = posenc::attn_rotary(x, posenc::iota_positions(16), table, proj).value();
    const auto q = nn::matmul(x, proj.w_q).value(), k = nn::matmul(x, proj.w_k).value();
    for (std::size_t i = 0; i < 16; ++i)
      for (std::size_t j = 0; j < 16; ++j) {
        const std::complex<double> qc(q(i, 0), q(i, 1)), kc(k(j, 0), k(j, 1));
        const double offset = static_cast<double>(i) - static_cast<double>(j);
        const double ref = std::real(qc * std::conj(kc) * std::polar(1.0, offset * theta)) / std::sqrt(2.0);
        complex_err = std::max(complex_err, std::abs(out(i, j) - ref));
      }
  }
  c.note("max|MtM-I|=" + sci(ortho));
  c.note("norm drift=" + sci(norm));
  c.note("shift err=" + sci(shift));
  c.note("complex err=" + sci(complex_err));
  c.expect(ortho < kOrthoTol, "orthogonality");
  c.expect(norm < kNormTol, "norm preservation");
  c.expect(shift < kShiftTol, "relative shift");
  c.expect(complex_err < kComplexTol, "complex form");
  return c.outcome();
}

Outcome sprm_suite() {
  Checker c;
  Rng rng(202);
  // All +1: bitwise equal to rotary attention.
  bool bitwise = true;
  for (std::size_t d : {2u, 4u, 8u}) {
    const posenc::RotaryTable table(d, 10000.0, 32);
    const auto proj = random_projection(d, rng);
    const Var x = nn::constant(random_tensor(12, d, rng));
    const auto pos = posenc::iota_positions(12);
    const auto a = posenc::attn_rotary(x, pos, table, proj).value();
    const auto b = posenc::attn_sp_rotary(x, pos, posenc::SignPattern::all_positive(12), table, proj).value();
    for (std::size_t i = 0; i < a.size(); ++i) bitwise = bitwise && a[i] == b[i];
  }
  // -1 at position m: that position's blocks are the transposes of RM's, others untouched.
  bool transpose = true;
  const posenc::RotaryTable t8(8, 10000.0, 32);
  const auto rm = posenc::build_sprm(posenc::SignPattern::all_positive(16), t8);
  for (std::size_t m = 1; m < 16; ++m) {
    std::vector<int> f(16, 1);
    f[m] = -1;
    const auto s = posenc::build_sprm(posenc::SignPattern::from_flags(f), t8);
    for (std::size_t p = 0; p < 16; ++p)
      for (std::size_t b = 0; b < 4; ++b) {
        const auto& r = rm[p][b];
        const posenc::Block2 expect = p == m ? posenc::Block2{r[0], r[2], r[1], r[3]} : r;
        transpose = transpose && s[p][b] == expect;
      }
  }
  // d = 2: with a switching point at key j, the effective angle is (i + j) theta.
  double angle = 0;
  const posenc::RotaryTable t2(2, 10000.0, 64);
  const double theta = t2.thetas()[0];
  const auto proj = random_projection(2, rng);
  const std::size_t n = 10;
  const Var x = nn::constant(random_tensor(n, 2, rng));
  const auto q = nn::matmul(x, proj.w_q).value(), k = nn::matmul(x, proj.w_k).value();
  for (std::size_t j = 1; j < n; ++j) {
    std::vector<int> f(n, 1);
    f[j] = -1;
    const auto out =
        posenc::attn_sp_rotary(x, posenc::iota_positions(n), posenc::SignPattern::from_flags(f), t2, proj).value();
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      const std::complex<double> qc(q(i, 0), q(i, 1)), kc(k(j, 0), k(j, 1));
      const double ref =
          std::real(qc * std::conj(kc) * std::polar(1.0, static_cast<double>(i + j) * theta)) / std::sqrt(2.0);
      angle = std::max(angle, std::abs(out(i, j) - ref));
    }
  }
  c.note(std::string("all(+1) bitwise=") + (bitwise ? "yes" : "no"));
  c.note(std::string("block transpose exact=") + (transpose ? "yes" : "no"));
  c.note("(i+j)theta err=" + sci(angle));
  c.expect(bitwise, "all-positive reduction");
  c.expect(transpose, "per-block transpose");
  c.expect(angle < kAngleTol, "angle oracle");
  return c.outcome();
}

Outcome gradient_suite() {
  Checker c;
  nn::GradCheckOptions opt;
  opt.eps = kGradEps;
  opt.tolerance = kGradTol;
  std::size_t cases = 0, failed = 0, kinks = 0;
  double worst = 0;
  std::string worst_name;
  for (std::uint64_t seed : {1u, 2u}) {
    for (const auto& r : model::run_gradient_suite(seed, opt)) {
      ++cases;
      if (!r.report.passed) {
        ++failed;
        c.expect(false, r.name);
      }
      for (const auto& b : r.report.blocks) kinks += b.nondifferentiable;
      if (r.report.max_rel_error > worst) {
        worst = r.report.max_rel_error;
        worst_name = r.name;
      }
    }
  }
  c.note(std::to_string(cases) + " cases");
  c.note("max rel err=" + sci(worst) + " (" + worst_name + ")");
  c.note("kinks skipped=" + std::to_string(kinks));
  return c.outcome();
}

Outcome corpus_oracles() {
  using corpus::LanguageTag;
  const auto L1 = LanguageTag::L1, L2 = LanguageTag::L2;
  Checker c;
  const auto u = corpus::make_utterance({{"ye", L1}, {"gaana", L1}, {"enjoy", L2}, {"kare", L1}});
  c.expect(u.spi == std::vector<int>{0, 1, 0, 0}, "SPI example");
  auto cmi = [](std::vector<LanguageTag> t, corpus::CmiWeights w) {
    const auto sp = corpus::detect_switching_points(std::span<const LanguageTag>(t));
    return corpus::compute_cmi(std::span<const LanguageTag>(t), sp.size(), w);
  };
  const corpus::CmiWeights half{0.5, 0.5}, ratio{1.0, 0.0};
  c.expect(cmi({L1, L1, L1, L1}, half) == 0.0, "monolingual CMI");
  c.expect(cmi({L1, L2, L1}, half) == 50.0, "(L1,L2,L1) CMI");
  const std::vector<LanguageTag> ti{L1, L1, L2, L2}, tj{L1, L2, L1, L2};
  c.expect(corpus::detect_switching_points(std::span<const LanguageTag>(ti)).size() == 1, "T_i switches");
  c.expect(corpus::detect_switching_points(std::span<const LanguageTag>(tj)).size() == 3, "T_j switches");
  c.expect(cmi(ti, ratio) == 50.0 && cmi(tj, ratio) == 50.0, "mixing-ratio term");
  c.expect(cmi(tj, half) > cmi(ti, half), "T_j above T_i");
  c.note("cmi(T_i)=" + fix(cmi(ti, half)) + " cmi(T_j)=" + fix(cmi(tj, half)));

  std::vector<corpus::HeapsSample> clean;
  for (double n : {10.0, 100.0, 1000.0, 10000.0, 100000.0}) clean.push_back({n, 20.0 * std::pow(n, 0.6)});
  const auto exact = corpus::fit_heaps(clean);
  c.expect(std::abs(exact.beta - 0.6) < 1e-12 && std::abs(exact.K - 20.0) < 1e-9, "noiseless Heaps");
  Rng rng(303);
  std::vector<corpus::HeapsSample> noisy;
  double prev = 0;
  for (int i = 1; i <= 80; ++i) {
    const double n = std::pow(10.0, 1.0 + 5.0 * i / 80.0);
    double v = 30.0 * std::pow(n, 0.68) * (1.0 + 0.02 * rng.normal());
    v = std::max(v, prev);
    prev = v;
    noisy.push_back({n, v});
  }
  const auto fit = corpus::fit_heaps(noisy);
  c.expect(std::abs(fit.beta - 0.68) <= kHeapsNoisyTol, "noisy Heaps");
  c.note("noiseless beta err=" + sci(std::abs(exact.beta - 0.6)));
  c.note("noisy beta=" + fix(fit.beta, 4) + " (true 0.68)");
  return c.outcome();
}

std::vector<std::string> words(const std::string& s) { return corpus::split_whitespace(s); }

Outcome metric_suite() {
  Checker c;
  std::vector<corpus::Utterance> data;
  for (const char* text : {"a b c", "d e", "f g h i"}) {
    std::vector<corpus::Token> toks;
    for (const auto& w : words(text)) toks.push_back({w, corpus::LanguageTag::L1});
    data.push_back(corpus::make_utterance(toks));
  }
  tasks::UniformScorer uniform(5000);
  const double ppl = tasks::perplexity_report(uniform, data).overall;
  // exp(mean NLL) is exact up to rounding; rounding log V moves the result by up to ln(V) / 2 ulp.
  const double ulps = std::abs(ppl - 5000.0) / (5000.0 * std::numeric_limits<double>::epsilon());
  c.expect(ulps <= std::log(5000.0) + kExactUlps, "uniform perplexity");
  c.note("uniform ppl=" + fix(ppl, 6) + " (V=5000, " + fix(ulps, 1) + " ulp)");

  const std::vector<std::string> labels{"positive", "negative"};
  const std::vector<std::string> gold{"positive", "negative", "negative"};
  c.expect(tasks::macro_f1(gold, gold, labels).macro == 1.0, "perfect F1");
  const std::vector<std::string> g2{"positive", "negative"}, p2{"positive", "positive"};
  const double degenerate = tasks::macro_f1(p2, g2, labels).macro;
  c.expect(std::abs(degenerate - 1.0 / 3.0) < 1e-12, "degenerate F1");
  c.note("degenerate F1=" + fix(degenerate, 6));

  const std::vector<std::vector<std::string>> refs{words("the cat is on the mat"), words("there is a cat here")};
  const double identity = tasks::bleu(refs, refs).score;
  c.expect(std::abs(identity - 100.0) < 1e-12, "BLEU identity");
  const double hand = tasks::bleu({words("the the the")}, {words("the cat")}).score;
  // Clipped unigram 1/3; bigram 0/2 -> 1/3 and trigram 0/1 -> 1/2 smoothed; no 4-gram.
  const double oracle = 100.0 * std::pow((1.0 / 3.0) * (1.0 / 3.0) * 0.5 * 1.0, 0.25);
  c.expect(std::abs(hand - oracle) < kBleuOracleTol, "BLEU clipping oracle");
  c.note("BLEU identity=" + fix(identity, 6));
  c.note("clip case=" + fix(hand, 6) + " oracle=" + fix(oracle, 6));
  return c.outcome();
}

// --- CLI-driven criteria -------------------------------------------------

int run_cli(const fs::path& dir, const std::string& command, const json& config, const fs::path& out) {
  const auto path = dir / (command + "_" + out.filename().string() + ".json");
  write_file_atomic(path.string(), config.dump(2));
  std::ostringstream err;
  const int code = cli::run_cli(command, path.string(), std::nullopt, out.string(), err);
  if (code != 0) std::fprintf(stderr, "%s failed (%d): %s", command.c_str(), code, err.str().c_str());
  return code;
}

json read_json(const fs::path& p) { return json::parse(read_file(p.string())); }

Outcome sp_signal_experiment(const fs::path& work) {
  Checker c;
  const auto dir = work / "sp_signal";
  fs::create_directories(dir);
  json synth{{"seed", 1},
             {"n_utterances", 1000},
             {"min_len", 8},
             {"max_len", 16},
             {"sp_density", 0.3},
             {"vocab", {{"l1", 60}, {"l2", 60}, {"post_sp", 12}, {"shared", 20}}},
             {"shared_fraction", 0.3},
             {"split", {{"train", 4}, {"test", 1}}}};
  if (run_cli(dir, "synth", synth, dir / "data") != 0) {
    c.expect(false, "synth");
    return c.outcome();
  }
  json train{{"steps", 1500}, {"batch_size", 8}, {"warmup_steps", 200}};
  json compare{{"task", "lm"},
               {"train_corpus", "data/train.jsonl"},
               {"eval_corpus", "data/test.jsonl"},
               {"variants", {"ROTARY", "SP_ROTARY"}},
               {"seeds", {1, 2, 3}},
               {"model", {{"n_layers", 2}, {"n_heads", 6}, {"d_model", 48}, {"d_ff", 96}, {"dropout_p", 0.2}}},
               {"train", train}};
  if (run_cli(dir, "compare-pe", compare, dir / "grid") != 0) {
    c.expect(false, "compare-pe");
    return c.outcome();
  }
  const auto report = read_json(dir / "grid" / "compare_pe.json");
  std::vector<double> rot, sp;
  std::size_t max_params = 0;
  for (const auto& row : report["rows"]) {
    (row["variant"] == "ROTARY" ? rot : sp).push_back(row["perplexity"].get<double>());
    max_params = std::max(max_params, row["parameters"].get<std::size_t>());
  }
  std::size_t wins = 0;
  double margin = 0;
  std::string per_seed;
  for (std::size_t i = 0; i < rot.size() && i < sp.size(); ++i) {
    wins += sp[i] < rot[i];
    margin += rot[i] - sp[i];
    per_seed += (i ? " " : "") + fix(rot[i]) + "/" + fix(sp[i]);
  }
  margin /= static_cast<double>(rot.size());
  c.note("ROTARY/SP_ROTARY ppl per seed: " + per_seed);
  c.note("SP_ROTARY lower in " + std::to_string(wins) + "/3");
  c.note("mean margin=" + fix(margin) + " (bound " + fix(kPinnedMargin) + ")");
  c.note("params=" + std::to_string(max_params));
  c.expect(rot.size() == 3 && sp.size() == 3, "three seeds per variant");
  c.expect(wins >= 2, "SP_ROTARY lower in at least 2 of 3 seeds");
  c.expect(margin >= kPinnedMargin, "pinned margin");
  c.expect(max_params <= kMaxParams, "parameter budget");
  c.expect(train["steps"].get<std::size_t>() <= kMaxSteps, "step budget");
  return c.outcome();
}

std::vector<std::vector<std::string>> csv_body(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

json small_model() { return {{"n_layers", 1}, {"n_heads", 4}, {"d_model", 24}, {"d_ff", 48}, {"dropout_p", 0.1}}; }

Outcome table_shapes(const fs::path& work) {
  Checker c;
  const auto dir = work / "reference";
  fs::create_directories(dir);
  json synth{{"seed", 7},
             {"n_utterances", 2000},
             {"min_len", 8},
             {"max_len", 24},
             {"target_mix", "reference"},
             {"split", {{"train", 4}, {"test", 1}}}};
  if (run_cli(dir, "synth", synth, dir / "data") != 0 ||
      run_cli(dir, "analyze", {{"corpus", "data/corpus.jsonl"}, {"lexicon", "data/lexicon.tsv"}}, dir / "analysis") != 0) {
    c.expect(false, "synth/analyze");
    return c.outcome();
  }
  const auto report = read_json(dir / "analysis" / "analyze_report.json");
  double worst = 0;
  std::string hist;
  for (std::size_t b = 0; b < corpus::kCmiBucketCount; ++b) {
    const double p = report["histogram"]["buckets"][b]["percent"].get<double>();
    worst = std::max(worst, std::abs(p - corpus::kReferenceCmiPercent[b]));
    hist += (b ? " " : "") + fix(p, 1);
  }
  c.note("histogram %: " + hist);
  c.note("max bucket gap=" + fix(worst) + " pts");
  c.expect(worst <= kHistogramTol, "histogram within 3 points");

  json train{{"train_corpus", "data/train.jsonl"},
             {"model", small_model()},
             {"train", {{"steps", 200}, {"batch_size", 8}, {"warmup_steps", 50}}}};
  if (run_cli(dir, "train-lm", train, dir / "lm") != 0 ||
      run_cli(dir, "eval-ppl", {{"checkpoint", "lm/lm_checkpoint.json"}, {"eval_corpus", "data/test.jsonl"}},
              dir / "ppl") != 0) {
    c.expect(false, "train-lm/eval-ppl");
    return c.outcome();
  }
  const auto rows = csv_body(read_file((dir / "ppl" / "perplexity.csv").string()));
  const std::vector<std::string> expected{"0-10", "11-20", "21-30", "31-40", "41-50", "Average"};
  bool shape = rows.size() >= 7 && rows[0][0] == "bucket";
  double weighted = 0, tokens = 0, average = 0;
  for (std::size_t i = 0; shape && i < expected.size(); ++i) {
    const auto& r = rows[i + 1];
    shape = r[0] == expected[i] && r[3] != "NA";
    if (!shape) break;
    if (i < 5) {
      weighted += std::stod(r[2]) * std::stod(r[3]);
      tokens += std::stod(r[2]);
    } else {
      average = std::stod(r[3]);
    }
  }
  c.expect(shape, "perplexity rows 0-10..41-50 + Average");
  if (shape) {
    c.note("Average ppl=" + fix(average) + " over " + fix(tokens, 0) + " tokens");
    c.expect(std::abs(weighted / tokens - average) < 1e-3, "Average is the token-weighted row mean");
  }
  return c.outcome();
}

bool same_outputs(const fs::path& a, const fs::path& b, std::string& diff) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++count_b;
  if (names.size() != count_b) {
    diff = a.filename().string() + ": file sets differ";
    return false;
  }
  for (const auto& n : names)
    if (!fs::exists(b / n) || read_file((a / n).string()) != read_file((b / n).string())) {
      diff = n;
      return false;
    }
  return true;
}

Outcome determinism(const fs::path& work) {
  Checker c;
  const auto dir = work / "determinism";
  fs::create_directories(dir);
  json synth{{"seed", 11},
             {"n_utterances", 300},
             {"min_len", 6},
             {"max_len", 12},
             {"vocab", {{"l1", 80}, {"l2", 80}, {"post_sp", 8}, {"shared", 10}}},
             {"shared_fraction", 0.2},
             {"labels", {"positive", "negative", "neutral"}},
             {"translation", "rule"},
             {"split", {{"train", 4}, {"test", 1}}}};
  if (run_cli(dir, "synth", synth, dir / "data") != 0) {
    c.expect(false, "synth");
    return c.outcome();
  }
  json train{{"steps", 40}, {"batch_size", 4}, {"warmup_steps", 10}, {"checkpoint_every", 20}};
  auto model = small_model();
  json sa_model = model;
  sa_model["pe"] = {{"variant", "SPDRPE"}};
  json mt_model = model;
  mt_model["use_bigram_stream"] = true;
  const std::vector<std::pair<std::string, json>> steps{
      {"train-lm", {{"train_corpus", "data/train.jsonl"}, {"model", model}, {"train", train}}},
      {"eval-ppl", {{"checkpoint", "train-lm_a/lm_checkpoint.json"}, {"eval_corpus", "data/test.jsonl"}}},
      {"train-sa", {{"train_corpus", "data/train.jsonl"}, {"model", sa_model}, {"train", train}}},
      {"eval-sa", {{"checkpoint", "train-sa_a/sa_checkpoint.json"}, {"eval_corpus", "data/test.jsonl"}}},
      {"train-mt", {{"train_corpus", "data/train.jsonl"}, {"model", mt_model}, {"train", train}}},
      {"eval-mt", {{"checkpoint", "train-mt_a/mt_checkpoint.json"}, {"eval_corpus", "data/test.jsonl"}, {"max_len", 16}}}};
  std::size_t files = 0;
  for (const auto& [command, cfg] : steps) {
    const auto a = dir / (command + "_a"), b = dir / (command + "_b");
    if (run_cli(dir, command, cfg, a) != 0 || run_cli(dir, command, cfg, b) != 0) {
      c.expect(false, command + " run");
      continue;
    }
    std::string diff;
    c.expect(same_outputs(a, b, diff), command + " differs in " + diff);
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(a)) ++files;
  }
  c.note(std::to_string(steps.size()) + " commands run twice");
  c.note(std::to_string(files) + " output files compared byte-for-byte");
  return c.outcome();
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "cmlab_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "rotary correctness suite", 10, rotary_suite},
      {2, "SPRM suite", 10, sprm_suite},
      {3, "gradient suite", 120, gradient_suite},
      {4, "corpus-metric oracle suite", 30, corpus_oracles},
      {5, "metric implementations", 10, metric_suite},
      {6, "SP-signal experiment", 1800, [&] { return sp_signal_experiment(work); }},
      {7, "bucketed perplexity and histogram shape", 0, [&] { return table_shapes(work); }},
      {8, "determinism of train/eval commands", 0, [&] { return determinism(work); }},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.budget_seconds > 0 && secs > cr.budget_seconds) {
      o.pass = false;
      o.detail += " | over runtime budget of " + fix(cr.budget_seconds, 0) + " s";
    }
    failed += !o.pass;
    std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", cr.id, cr.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
