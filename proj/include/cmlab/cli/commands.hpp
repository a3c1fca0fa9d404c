#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cmlab/cli/config.hpp"

namespace cmlab::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

const std::vector<std::string>& command_names();

/// Each command reads its keys from ctx.config and writes into ctx.out_dir.
///
/// analyze:        corpus, lexicon, overlap_policy, cmi_weights, heaps_points, compare_corpus, top_k
/// synth:          n_utterances, min_len, max_len, target_mix, sp_density, vocab, shared_fraction,
///                 zipf_exponent, cmi_weights, labels, translation, split
/// train-lm/sa/mt: train_corpus, lexicon, overlap_policy, cmi_weights, model, train, word2vec
///                 (train-sa also labels, validation_share)
/// eval-ppl/sa/mt: checkpoint, eval_corpus, lexicon, overlap_policy, cmi_weights
///                 (eval-mt also max_len, max_n, smoothing, beam_width)
/// compare-pe:     task, train_corpus, eval_corpus, variants, seeds, model, train, labels, ...
/// dump-attention: checkpoint, utterance, lexicon, overlap_policy, layer, head, stats_corpus, stats_limit
void cmd_analyze(const RunContext& ctx);
void cmd_synth(const RunContext& ctx);
void cmd_train_lm(const RunContext& ctx);
void cmd_eval_ppl(const RunContext& ctx);
void cmd_train_sa(const RunContext& ctx);
void cmd_eval_sa(const RunContext& ctx);
void cmd_train_mt(const RunContext& ctx);
void cmd_eval_mt(const RunContext& ctx);
void cmd_compare_pe(const RunContext& ctx);
void cmd_dump_attention(const RunContext& ctx);

/// Runs a command by name. Throws std::invalid_argument for an unknown name.
void run_command(const RunContext& ctx);

/// Loads the config, runs the command and maps failures to exit codes,
/// printing the message to `err`.
int run_cli(const std::string& command, const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir, std::ostream& err);

}  // namespace cmlab::cli
