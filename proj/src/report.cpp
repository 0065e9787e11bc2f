#include "ifl/io.hpp"

#include "ifl/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace ifl::io {

using json = nlohmann::ordered_json;

namespace {

json adam_json(const nn::AdamConfig& a) {
  return {{"learning_rate", a.learning_rate}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"epsilon", a.epsilon}};
}

nn::AdamConfig adam_from(const json& j) {
  return {j.at("learning_rate").get<double>(), j.at("beta1").get<double>(), j.at("beta2").get<double>(),
          j.at("epsilon").get<double>()};
}

json ifl_json(const core::IflConfig& c) {
  return {{"s", c.s},
          {"r", c.r},
          {"hidden_dims", c.hidden_dims},
          {"latent_dim", c.latent_dim},
          {"autoencoder",
           {{"epochs", c.autoencoder.epochs},
            {"batch_size", c.autoencoder.batch_size},
            {"adam", adam_json(c.autoencoder.adam)},
            {"hidden_activation", c.autoencoder.hidden_activation == nn::Activation::Relu ? "relu" : "linear"}}},
          {"dec",
           {{"alpha", c.dec.alpha},
            {"tol", c.dec.tol},
            {"max_iter", c.dec.max_iter},
            {"update_interval", c.dec.update_interval},
            {"batch_size", c.dec.batch_size},
            {"learning_rate", c.dec.learning_rate},
            {"kmeans_restarts", c.dec.kmeans_restarts}}},
          {"seed", c.seed},
          {"threads", c.threads}};
}

core::IflConfig ifl_from(const json& j) {
  core::IflConfig c;
  c.s = j.at("s").get<std::size_t>();
  c.r = j.at("r").get<std::size_t>();
  c.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  const auto& ae = j.at("autoencoder");
  c.autoencoder.epochs = ae.at("epochs").get<std::size_t>();
  c.autoencoder.batch_size = ae.at("batch_size").get<std::size_t>();
  c.autoencoder.adam = adam_from(ae.at("adam"));
  c.autoencoder.hidden_activation =
      ae.at("hidden_activation").get<std::string>() == "relu" ? nn::Activation::Relu : nn::Activation::Linear;
  const auto& d = j.at("dec");
  c.dec.alpha = d.at("alpha").get<double>();
  c.dec.tol = d.at("tol").get<double>();
  c.dec.max_iter = d.at("max_iter").get<std::size_t>();
  c.dec.update_interval = d.at("update_interval").get<std::size_t>();
  c.dec.batch_size = d.at("batch_size").get<std::size_t>();
  c.dec.learning_rate = d.at("learning_rate").get<double>();
  c.dec.kmeans_restarts = d.at("kmeans_restarts").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.threads = j.at("threads").get<std::size_t>();
  return c;
}

json config_json(const eval::ExperimentConfig& c) {
  json methods = json::array();
  for (auto m : c.methods) methods.push_back(eval::to_string(m));
  json modes = json::array();
  for (auto m : c.feature_modes) modes.push_back(eval::to_string(m));
  return {{"task", eval::to_string(c.task)},
          {"methods", methods},
          {"feature_modes", modes},
          {"repeats", c.repeats},
          {"master_seed", c.master_seed},
          {"ifl", ifl_json(c.ifl)},
          {"technique", c.technique},
          {"knn_k", c.knn_k},
          {"mlp",
           {{"hidden_dims", c.mlp.hidden_dims},
            {"epochs", c.mlp.epochs},
            {"batch_size", c.mlp.batch_size},
            {"learning_rate", c.mlp.learning_rate}}},
          {"kmeans_restarts", c.kmeans_restarts},
          {"rescale_ifl", c.rescale_ifl}};
}

eval::ExperimentConfig config_from(const json& j) {
  eval::ExperimentConfig c;
  c.task = eval::task_from_string(j.at("task").get<std::string>());
  c.methods.clear();
  for (const auto& m : j.at("methods")) c.methods.push_back(eval::method_from_string(m.get<std::string>()));
  c.feature_modes.clear();
  for (const auto& m : j.at("feature_modes")) c.feature_modes.push_back(eval::input_mode_from_string(m.get<std::string>()));
  c.repeats = j.at("repeats").get<std::size_t>();
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  c.ifl = ifl_from(j.at("ifl"));
  c.technique = j.at("technique").get<int>();
  c.knn_k = j.at("knn_k").get<std::size_t>();
  const auto& mlp = j.at("mlp");
  c.mlp.hidden_dims = mlp.at("hidden_dims").get<std::vector<std::size_t>>();
  c.mlp.epochs = mlp.at("epochs").get<std::size_t>();
  c.mlp.batch_size = mlp.at("batch_size").get<std::size_t>();
  c.mlp.learning_rate = mlp.at("learning_rate").get<double>();
  c.kmeans_restarts = j.at("kmeans_restarts").get<std::size_t>();
  c.rescale_ifl = j.at("rescale_ifl").get<bool>();
  return c;
}

}  // namespace

std::string report_to_json(const eval::ExperimentReport& report, const ReportOptions& opts) {
  json cells = json::array();
  for (const auto& c : report.cells) {
    json cell = {{"method", c.method},
                 {"feature_mode", c.feature_mode},
                 {"input_width", c.input_width},
                 {"mean", c.mean},
                 {"variance", c.variance},
                 {"raw", c.raw}};
    if (!c.init_raw.empty()) cell["init_raw"] = c.init_raw;
    cell["errors"] = c.errors;
    cells.push_back(std::move(cell));
  }
  json inputs = json::object();
  for (const auto& [key, value] : report.inputs) inputs[key] = value;
  json doc = {{"config", config_json(report.config)},
              {"inputs", inputs},
              {"seeds", report.seeds},
              {"cells", cells},
              {"warnings", report.warnings}};
  if (opts.include_timing) {
    doc["timing"] = {{"total_seconds", report.total_seconds}, {"repeat_seconds", report.repeat_seconds}};
  }
  return doc.dump(2) + "\n";
}

eval::ExperimentReport report_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    eval::ExperimentReport report;
    report.config = config_from(doc.at("config"));
    for (const auto& [key, value] : doc.at("inputs").items()) report.inputs.emplace_back(key, value.get<std::string>());
    report.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& c : doc.at("cells")) {
      eval::Cell cell;
      cell.method = c.at("method").get<std::string>();
      cell.feature_mode = c.at("feature_mode").get<std::string>();
      cell.input_width = c.at("input_width").get<std::size_t>();
      cell.mean = c.at("mean").get<double>();
      cell.variance = c.at("variance").get<double>();
      cell.raw = c.at("raw").get<std::vector<double>>();
      if (c.contains("init_raw")) cell.init_raw = c.at("init_raw").get<std::vector<double>>();
      cell.errors = c.at("errors").get<std::vector<std::string>>();
      report.cells.push_back(std::move(cell));
    }
    report.warnings = doc.at("warnings").get<std::vector<std::string>>();
    if (doc.contains("timing")) {
      report.total_seconds = doc.at("timing").at("total_seconds").get<double>();
      report.repeat_seconds = doc.at("timing").at("repeat_seconds").get<std::vector<double>>();
    }
    return report;
  } catch (const json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
}

void export_report(const eval::ExperimentReport& report, const std::filesystem::path& path, const ReportOptions& opts) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << report_to_json(report, opts);
  if (!out) throw DataError(path.string() + ": write failed");
}

eval::ExperimentReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return report_from_json(buf.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace ifl::io
