#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skelact/classifier.hpp"
#include "skelact/error.hpp"

namespace skelact {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "skelact-model";

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::kCorruptModel, what);
}

json config_json(const ModelConfig& c) {
  return {{"input_frames", c.input_frames},     {"input_channels", c.input_channels},
          {"num_classes", c.num_classes},       {"base_filters", c.base_filters},
          {"conv_kernel", c.conv_kernel},       {"pool_stride", c.pool_stride},
          {"spatial_dropout", c.spatial_dropout}, {"fc_width", c.fc_width},
          {"activation", c.activation},         {"leaky_slope", c.leaky_slope},
          {"seed", c.seed}};
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.input_frames = j.at("input_frames").get<std::size_t>();
  c.input_channels = j.at("input_channels").get<std::size_t>();
  c.num_classes = j.at("num_classes").get<std::size_t>();
  c.base_filters = j.at("base_filters").get<std::size_t>();
  c.conv_kernel = j.at("conv_kernel").get<std::size_t>();
  c.pool_stride = j.at("pool_stride").get<std::size_t>();
  c.spatial_dropout = j.at("spatial_dropout").get<double>();
  c.fc_width = j.at("fc_width").get<std::size_t>();
  c.activation = j.at("activation").get<std::string>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void read_array(const json& j, std::vector<double>& dst, const std::string& what) {
  if (!j.is_array() || j.size() != dst.size()) corrupt(what + ": wrong length");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (!j[i].is_number()) corrupt(what + ": non-numeric entry");
    dst[i] = j[i].get<double>();
  }
}

}  // namespace

std::string model_to_json(const Model& model) {
  json doc;
  doc["format"] = kFormat;
  doc["layout_version"] = model.layout_version();
  doc["config"] = config_json(model.config());
  doc["class_names"] = model.class_names;
  doc["adam_step"] = model.adam_step();
  json blocks = json::array();
  for (const auto* p : model.parameters()) {
    blocks.push_back({{"name", p->name},
                      {"shape", p->shape},
                      {"value", p->value},
                      {"adam_m", p->adam_m},
                      {"adam_v", p->adam_v}});
  }
  doc["blocks"] = std::move(blocks);
  json stats = json::array();
  for (const auto& layer : model.layers()) {
    if (const auto* bn = std::get_if<nn::BatchNorm1d>(&layer)) {
      stats.push_back({{"running_mean", bn->running_mean}, {"running_var", bn->running_var}});
    }
  }
  doc["batch_norm_stats"] = std::move(stats);
  return doc.dump();
}

Model model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    corrupt(e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", std::string{}) != kFormat) {
      corrupt("not a skelact model file");
    }
    const int version = doc.at("layout_version").get<int>();
    if (version != kModelLayoutVersion) {
      throw Error(ErrorCode::kVersionMismatch,
                  "model layout_version " + std::to_string(version) + ", expected " +
                      std::to_string(kModelLayoutVersion));
    }
    Model model(config_from(doc.at("config")));
    model.class_names = doc.value("class_names", std::vector<std::string>{});
    model.set_adam_step(doc.at("adam_step").get<std::uint64_t>());

    const auto& blocks = doc.at("blocks");
    auto params = model.parameters();
    if (!blocks.is_array() || blocks.size() != params.size()) corrupt("parameter block count");
    for (std::size_t b = 0; b < params.size(); ++b) {
      const auto& jb = blocks[b];
      if (jb.at("name").get<std::string>() != params[b]->name) corrupt("parameter block order");
      read_array(jb.at("value"), params[b]->value, params[b]->name);
      read_array(jb.at("adam_m"), params[b]->adam_m, params[b]->name);
      read_array(jb.at("adam_v"), params[b]->adam_v, params[b]->name);
    }
    const auto& stats = doc.at("batch_norm_stats");
    std::size_t k = 0;
    for (auto& layer : model.layers()) {
      if (auto* bn = std::get_if<nn::BatchNorm1d>(&layer)) {
        if (k >= stats.size()) corrupt("missing batch norm statistics");
        read_array(stats[k].at("running_mean"), bn->running_mean, "running_mean");
        read_array(stats[k].at("running_var"), bn->running_var, "running_var");
        ++k;
      }
    }
    if (k != stats.size()) corrupt("extra batch norm statistics");
    return model;
  } catch (const json::exception& e) {
    corrupt(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) corrupt(e.what());
    throw;
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << model_to_json(model) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace skelact
