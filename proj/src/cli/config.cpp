#include "faultae/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "faultae/csv.hpp"

namespace faultae::cli {

KeyValues parse_ini(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    const std::string t = csv::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ParseError("unterminated section header", line_no);
      section = csv::trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const std::string key = csv::trim(std::string_view(t).substr(0, eq));
    const std::string value = csv::trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

KeyValues load_ini(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str());
}

namespace {

double to_double(const std::string& key, const std::string& v) {
  double d = 0.0;
  if (!csv::parse_double(v, d) || !std::isfinite(d)) {
    throw ValidationError("config " + key + ": '" + v + "' is not a number");
  }
  return d;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int x{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ValidationError("config " + key + ": '" + v + "' is not an integer");
  }
  return x;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"paths.sensor_csv", [](RunConfig& c, auto&, auto& v) { c.sensor_csv = v; }},
      {"paths.fault_csv", [](RunConfig& c, auto&, auto& v) { c.fault_csv = v; }},
      {"paths.model", [](RunConfig& c, auto&, auto& v) { c.model = v; }},
      {"paths.out_dir", [](RunConfig& c, auto&, auto& v) { c.out_dir = v; }},
      {"paths.scores", [](RunConfig& c, auto&, auto& v) { c.scores = v; }},
      {"paths.latent", [](RunConfig& c, auto&, auto& v) { c.latent = v; }},
      {"data.timestamp_column", [](RunConfig& c, auto&, auto& v) { c.timestamp_column = v; }},
      {"data.missing_sentinel", [](RunConfig& c, auto&, auto& v) { c.missing_sentinel = v; }},
      {"split.train_ratio", [](RunConfig& c, auto& k, auto& v) { c.train_ratio = to_double(k, v); }},
      {"split.validation_ratio",
       [](RunConfig& c, auto& k, auto& v) { c.validation_ratio = to_double(k, v); }},
      {"window.length", [](RunConfig& c, auto& k, auto& v) { c.window.length = to_int<Index>(k, v); }},
      {"window.stride", [](RunConfig& c, auto& k, auto& v) { c.window.stride = to_int<Index>(k, v); }},
      {"model.architecture",
       [](RunConfig& c, auto&, auto& v) { c.architecture = architecture_from_string(v); }},
      {"train.max_epochs", [](RunConfig& c, auto& k, auto& v) { c.max_epochs = to_int<int>(k, v); }},
      {"train.learning_rate",
       [](RunConfig& c, auto& k, auto& v) { c.learning_rate = to_double(k, v); }},
      {"train.batch_size", [](RunConfig& c, auto& k, auto& v) { c.batch_size = to_int<Index>(k, v); }},
      {"train.es_patience", [](RunConfig& c, auto& k, auto& v) { c.es_patience = to_int<int>(k, v); }},
      {"train.plateau_patience",
       [](RunConfig& c, auto& k, auto& v) { c.plateau_patience = to_int<int>(k, v); }},
      {"train.plateau_factor",
       [](RunConfig& c, auto& k, auto& v) { c.plateau_factor = to_double(k, v); }},
      {"train.loss", [](RunConfig& c, auto&, auto& v) { c.loss = loss_from_string(v); }},
      {"train.warmup_epochs",
       [](RunConfig& c, auto& k, auto& v) { c.warmup_epochs = to_int<int>(k, v); }},
      {"detect.alpha", [](RunConfig& c, auto& k, auto& v) { c.alpha = to_double(k, v); }},
      {"synth.profile", [](RunConfig& c, auto&, auto& v) { c.synth_profile = v; }},
      {"synth.samples", [](RunConfig& c, auto& k, auto& v) { c.synth_samples = to_int<Index>(k, v); }},
      {"synth.gap_fraction",
       [](RunConfig& c, auto& k, auto& v) { c.synth_gap_fraction = to_double(k, v); }},
      {"latent.partition",
       [](RunConfig& c, auto&, auto& v) { c.latent_partition = partition_from_string(v); }},
      {"run.seed", [](RunConfig& c, auto& k, auto& v) { c.seed = to_int<std::uint64_t>(k, v); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return names;
}

void RunConfig::apply(const KeyValues& values) {
  for (const auto& [key, value] : values) {
    bool found = false;
    for (const auto& [name, set] : setters()) {
      if (name == key) {
        try {
          set(*this, key, value);
        } catch (const ParseError& e) {
          throw ValidationError("config " + key + ": " + e.what());
        }
        found = true;
        break;
      }
    }
    if (!found) throw ValidationError("unknown config key '" + key + "'");
  }
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t = architecture == Architecture::lstm_ae ? TrainConfig::lstm_defaults()
                                                         : TrainConfig::dense_defaults();
  t.max_epochs = max_epochs;
  if (learning_rate) t.learning_rate = *learning_rate;
  t.batch_size = batch_size;
  t.es_patience = es_patience;
  t.plateau_patience = plateau_patience;
  t.plateau_factor = plateau_factor;
  t.loss = loss;
  t.warmup_epochs = warmup_epochs;
  t.seed = seed;
  return t;
}

void RunConfig::validate() const {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw ValidationError("split.train_ratio must lie in (0, 1)");
  if (!(validation_ratio > 0.0 && validation_ratio < 1.0)) {
    throw ValidationError("split.validation_ratio must lie in (0, 1)");
  }
  if (window.length < 1 || window.stride < 1) throw ValidationError("window length and stride must be positive");
  if (loss == LossKind::mahalanobis && architecture != Architecture::dense_ae) {
    throw ValidationError("the mahalanobis loss is only available for dense_ae");
  }
  train_config().validate();
}

}  // namespace faultae::cli
