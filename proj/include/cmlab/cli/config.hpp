#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cmlab/corpus/corpus_io.hpp"
#include "cmlab/corpus/lexicon.hpp"
#include "cmlab/corpus/types.hpp"

namespace cmlab::cli {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr std::uint64_t kDefaultSeed = 1;

/// One command invocation: the parsed config with the effective seed
/// written back into it, the directory relative paths resolve against, and
/// the output directory.
struct RunContext {
  std::string command;
  json config;
  std::filesystem::path base_dir;
  std::filesystem::path out_dir;
  std::uint64_t seed = kDefaultSeed;
  std::string config_hash;  // FNV-1a of the effective config text

  /// Input path under `key`, resolved against base_dir. Throws ConfigError
  /// if the key is missing (when required) or the file does not exist.
  std::optional<std::string> input_path(std::string_view key, bool required) const;
  std::string output_path(std::string_view name) const;
};

/// Reads and parses the config, applies a --seed override and hashes the
/// result. Throws ConfigError for unreadable or malformed files.
RunContext load_run(std::string command, const std::string& config_path, std::optional<std::uint64_t> seed,
                    const std::string& out_dir);
RunContext run_from_json(std::string command, json config, const std::filesystem::path& base_dir,
                         std::optional<std::uint64_t> seed, const std::string& out_dir);

/// Throws ConfigError naming the first key of `j` not in `allowed`, or if
/// `j` is not an object.
void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where);

/// Typed lookups that turn JSON type errors into ConfigError.
[[noreturn]] void throw_type_error(std::string_view key, std::string_view where);
[[noreturn]] void throw_missing(std::string_view key, std::string_view where);

template <class T>
T get_or(const json& j, std::string_view key, T fallback, std::string_view where) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw_type_error(key, where);
  }
}

template <class T>
T get_required(const json& j, std::string_view key, std::string_view where) {
  const auto it = j.find(key);
  if (it == j.end()) throw_missing(key, where);
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw_type_error(key, where);
  }
}

/// Non-negative integer lookup; negative or fractional values are rejected.
std::size_t get_count(const json& j, std::string_view key, std::size_t fallback, std::string_view where);

/// Optional "cmi_weights": {"w_m": .., "w_p": ..}.
corpus::CmiWeights cmi_weights(const RunContext& ctx);
/// Optional "lexicon" path with "overlap_policy".
std::optional<corpus::Lexicon> lexicon(const RunContext& ctx);
std::vector<corpus::Utterance> load_corpus_key(const RunContext& ctx, std::string_view key,
                                               const corpus::Lexicon* lex, const corpus::CmiWeights& weights,
                                               corpus::MissingTags missing = corpus::MissingTags::Reject);

/// Files of one command, written together once every computation succeeded.
class Outputs {
 public:
  void add(std::string name, std::string content);
  void commit(const std::filesystem::path& out_dir) const;
  const std::map<std::string, std::string>& files() const { return files_; }

 private:
  std::map<std::string, std::string> files_;
};

/// Common report fields: schema_version, command, config_hash, seed.
json report_header(const RunContext& ctx);
/// '#'-prefixed provenance lines for CSV outputs.
std::string csv_preamble(const RunContext& ctx);
/// RFC 4180 quoting when the field contains a comma, quote or newline.
std::string csv_field(std::string_view s);

}  // namespace cmlab::cli
