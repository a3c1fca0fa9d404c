#include "cmlab/model/checkpoint.hpp"

#include "cmlab/util/errors.hpp"
#include "cmlab/util/fsio.hpp"

namespace cmlab::model {

using json = nlohmann::ordered_json;

namespace {

json tensor_block(const std::string& name, const nn::Tensor& t) {
  json b;
  b["name"] = name;
  b["shape"] = {t.rows(), t.cols()};
  b["values"] = std::vector<double>(t.values().begin(), t.values().end());
  return b;
}

nn::Tensor read_tensor(const json& values, std::size_t rows, std::size_t cols, const std::string& name) {
  const auto v = values.get<std::vector<double>>();
  if (v.size() != rows * cols) throw DataError("checkpoint: block '" + name + "' has the wrong number of values");
  return nn::Tensor(rows, cols, v);
}

}  // namespace

json checkpoint_to_json(const Transformer& model, const TrainingState* training, const json& extras) {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["spec"] = to_json(model.spec());
  json params = json::array();
  for (const auto& [name, v] : model.params().entries()) params.push_back(tensor_block(name, v.value()));
  j["params"] = std::move(params);
  if (training) {
    const auto& opt = training->optimizer;
    json o;
    o["beta1"] = opt.beta1;
    o["beta2"] = opt.beta2;
    o["epsilon"] = opt.epsilon;
    o["step"] = opt.step;
    json moments = json::array();
    for (const auto& [name, m] : opt.first_moment) {
      json b = tensor_block(name, m);
      b["second"] = std::vector<double>(opt.second_moment.at(name).values().begin(),
                                        opt.second_moment.at(name).values().end());
      moments.push_back(std::move(b));
    }
    o["moments"] = std::move(moments);
    j["optimizer"] = std::move(o);
    j["rng"] = training->rng_state;
    j["step"] = training->step;
  }
  j["extras"] = extras;
  return j;
}

LoadedCheckpoint checkpoint_from_json(const json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kCheckpointFormat) throw DataError("not a cmlab checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw DataError("unsupported checkpoint version " + j.at("version").dump());
    const ModelSpec spec = model_spec_from_json(j.at("spec"));
    LoadedCheckpoint out;
    out.model = std::make_unique<Transformer>(spec, 0);
    auto& store = out.model->params();
    const auto& blocks = j.at("params");
    if (blocks.size() != store.entries().size()) throw DataError("checkpoint: parameter block count differs from spec");
    for (const auto& b : blocks) {
      const auto name = b.at("name").get<std::string>();
      if (!store.contains(name)) throw DataError("checkpoint: unexpected parameter '" + name + "'");
      auto& v = store.get(name);
      const auto shape = b.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2 || shape[0] != v.rows() || shape[1] != v.cols())
        throw DataError("checkpoint: shape mismatch for '" + name + "'");
      v.mutable_value() = read_tensor(b.at("values"), shape[0], shape[1], name);
    }
    if (j.contains("optimizer")) {
      TrainingState st;
      const auto& o = j.at("optimizer");
      st.optimizer.beta1 = o.at("beta1").get<double>();
      st.optimizer.beta2 = o.at("beta2").get<double>();
      st.optimizer.epsilon = o.at("epsilon").get<double>();
      st.optimizer.step = o.at("step").get<std::uint64_t>();
      for (const auto& m : o.at("moments")) {
        const auto name = m.at("name").get<std::string>();
        const auto shape = m.at("shape").get<std::vector<std::size_t>>();
        if (shape.size() != 2) throw DataError("checkpoint: bad moment shape for '" + name + "'");
        st.optimizer.first_moment[name] = read_tensor(m.at("values"), shape[0], shape[1], name);
        st.optimizer.second_moment[name] = read_tensor(m.at("second"), shape[0], shape[1], name);
      }
      st.rng_state = j.at("rng").get<std::string>();
      st.step = j.at("step").get<std::uint64_t>();
      out.training = std::move(st);
    }
    out.extras = j.value("extras", json::object());
    return out;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Transformer& model, const TrainingState* training,
                     const json& extras) {
  write_file_atomic(path, checkpoint_to_json(model, training, extras).dump() + "\n");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace cmlab::model
