#include <stdexcept>

#include "cmlab/cli/commands.hpp"
#include "cmlab/util/errors.hpp"

namespace cmlab::cli {

namespace {

using Handler = void (*)(const RunContext&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> table{
      {"analyze", cmd_analyze},       {"synth", cmd_synth},       {"train-lm", cmd_train_lm},
      {"eval-ppl", cmd_eval_ppl},     {"train-sa", cmd_train_sa}, {"eval-sa", cmd_eval_sa},
      {"train-mt", cmd_train_mt},     {"eval-mt", cmd_eval_mt},   {"compare-pe", cmd_compare_pe},
      {"dump-attention", cmd_dump_attention}};
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, h] : handlers()) n.push_back(name);
    return n;
  }();
  return names;
}

void run_command(const RunContext& ctx) {
  for (const auto& [name, h] : handlers()) {
    if (name == ctx.command) {
      h(ctx);
      return;
    }
  }
  throw std::invalid_argument("unknown command '" + ctx.command + "'");
}

int run_cli(const std::string& command, const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir, std::ostream& err) {
  try {
    run_command(load_run(command, config_path, seed, out_dir));
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace cmlab::cli
