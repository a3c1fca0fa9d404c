#include "cmlab/cli/config.hpp"

#include <algorithm>

#include "cmlab/util/errors.hpp"
#include "cmlab/util/fsio.hpp"

namespace cmlab::cli {

namespace fs = std::filesystem;

std::optional<std::string> RunContext::input_path(std::string_view key, bool required) const {
  const auto it = config.find(key);
  if (it == config.end()) {
    if (required) throw_missing(key, command);
    return std::nullopt;
  }
  if (!it->is_string()) throw_type_error(key, command);
  fs::path p = it->get<std::string>();
  if (p.is_relative()) p = base_dir / p;
  if (!fs::is_regular_file(p)) throw ConfigError(command + ": '" + std::string(key) + "' not found: " + p.string());
  return p.string();
}

std::string RunContext::output_path(std::string_view name) const { return (out_dir / name).string(); }

RunContext run_from_json(std::string command, json config, const fs::path& base_dir,
                         std::optional<std::uint64_t> seed, const std::string& out_dir) {
  if (!config.is_object()) throw ConfigError(command + ": config must be a JSON object");
  RunContext ctx;
  ctx.command = std::move(command);
  if (seed) {
    config["seed"] = *seed;
  } else if (config.contains("seed")) {
    const auto& s = config["seed"];
    if (!s.is_number_integer() || s.get<std::int64_t>() < 0) throw ConfigError(ctx.command + ": 'seed' must be a non-negative integer");
  } else {
    config["seed"] = kDefaultSeed;
  }
  ctx.seed = config["seed"].get<std::uint64_t>();
  ctx.config_hash = fnv1a_hex(config.dump());
  ctx.config = std::move(config);
  ctx.base_dir = base_dir;
  ctx.out_dir = out_dir;
  return ctx;
}

RunContext load_run(std::string command, const std::string& config_path, std::optional<std::uint64_t> seed,
                    const std::string& out_dir) {
  const std::string text = read_file(config_path);
  json config;
  try {
    config = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(config_path + ": " + e.what());
  }
  return run_from_json(std::move(command), std::move(config), fs::path(config_path).parent_path(), seed, out_dir);
}

void throw_type_error(std::string_view key, std::string_view where) {
  throw ConfigError(std::string(where) + ": wrong type for '" + std::string(key) + "'");
}

void throw_missing(std::string_view key, std::string_view where) {
  throw ConfigError(std::string(where) + ": missing required key '" + std::string(key) + "'");
}

std::size_t get_count(const json& j, std::string_view key, std::size_t fallback, std::string_view where) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) throw_type_error(key, where);
  if (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0)
    throw ConfigError(std::string(where) + ": '" + std::string(key) + "' must be >= 0");
  return it->get<std::size_t>();
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
}

corpus::CmiWeights cmi_weights(const RunContext& ctx) {
  corpus::CmiWeights w;
  const auto it = ctx.config.find("cmi_weights");
  if (it == ctx.config.end()) return w;
  check_keys(*it, {"w_m", "w_p"}, "cmi_weights");
  w.w_m = get_or(*it, "w_m", w.w_m, "cmi_weights");
  w.w_p = get_or(*it, "w_p", w.w_p, "cmi_weights");
  try {
    w.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("cmi_weights: ") + e.what());
  }
  return w;
}

std::optional<corpus::Lexicon> lexicon(const RunContext& ctx) {
  const auto policy_name = get_or<std::string>(ctx.config, "overlap_policy", "other", ctx.command);
  corpus::OverlapPolicy policy;
  try {
    policy = corpus::parse_policy(policy_name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ctx.command + ": " + e.what());
  }
  const auto path = ctx.input_path("lexicon", false);
  if (!path) return std::nullopt;
  return corpus::load_lexicon(*path, policy);
}

std::vector<corpus::Utterance> load_corpus_key(const RunContext& ctx, std::string_view key,
                                               const corpus::Lexicon* lex, const corpus::CmiWeights& weights,
                                               corpus::MissingTags missing) {
  const auto path = ctx.input_path(key, true);
  auto c = corpus::load_corpus(*path, lex, weights, missing);
  if (c.empty()) throw DataError(ctx.command + ": corpus '" + *path + "' is empty");
  return c;
}

void Outputs::add(std::string name, std::string content) { files_[std::move(name)] = std::move(content); }

void Outputs::commit(const fs::path& out_dir) const {
  for (const auto& [name, content] : files_) write_file_atomic((out_dir / name).string(), content);
}

json report_header(const RunContext& ctx) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = ctx.command;
  j["config_hash"] = ctx.config_hash;
  j["seed"] = ctx.seed;
  return j;
}

std::string csv_preamble(const RunContext& ctx) {
  return "# command=" + ctx.command + "\n# config_hash=" + ctx.config_hash + "\n# seed=" + std::to_string(ctx.seed) +
         "\n";
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace cmlab::cli
