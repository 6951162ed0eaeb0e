#include "faultae/model_io.hpp"

#include <fstream>
#include <iterator>
#include <json.hpp>

#include "faultae/csv.hpp"

namespace faultae {

using nlohmann::json;

const char* to_string(Architecture a) { return a == Architecture::dense_ae ? "dense_ae" : "lstm_ae"; }

Architecture architecture_from_string(const std::string& text) {
  if (text == "dense_ae") return Architecture::dense_ae;
  if (text == "lstm_ae") return Architecture::lstm_ae;
  throw ValidationError("unknown architecture '" + text + "' (expected dense_ae or lstm_ae)");
}

Index ModelBundle::features() const {
  return std::visit([](const auto& net) { return net.features(); }, network);
}

ScoreKind ModelBundle::score_kind() const {
  if (architecture() == Architecture::lstm_ae) return ScoreKind::mse_window;
  return covariance ? ScoreKind::mahalanobis : ScoreKind::mse_point;
}

namespace {

// Row-major flat array plus shape.
template <class Derived>
json tensor_json(const Eigen::MatrixBase<Derived>& m) {
  json data = json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix tensor_from_json(const json& j, Index rows, Index cols, const std::string& what) {
  if (j.at("rows").get<Index>() != rows || j.at("cols").get<Index>() != cols) {
    throw ModelFormatError(what + ": expected shape " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  const auto& data = j.at("data");
  if (!data.is_array() || static_cast<Index>(data.size()) != rows * cols) {
    throw ModelFormatError(what + ": data length does not match shape");
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      const auto& v = data[k++];
      if (!v.is_number()) throw ModelFormatError(what + ": non-numeric entry");
      m(r, c) = v.get<double>();
    }
  return m;
}

Vector vector_from_json(const json& j, Index size, const std::string& what) {
  return tensor_from_json(j, size, 1, what);
}

json dense_json(const std::string& name, const nn::DenseLayer<double>& l) {
  return json{{"name", name},
              {"kind", "dense"},
              {"inputs", l.inputs()},
              {"outputs", l.outputs()},
              {"activation", nn::to_string(l.activation)},
              {"weight", tensor_json(l.weight)},
              {"bias", tensor_json(l.bias)}};
}

nn::DenseLayer<double> dense_from_json(const json& j) {
  if (j.at("kind") != "dense") throw ModelFormatError("expected a dense layer");
  const auto name = j.at("name").get<std::string>();
  const Index in = j.at("inputs").get<Index>();
  const Index out = j.at("outputs").get<Index>();
  nn::DenseLayer<double> l;
  l.activation = nn::activation_from_string(j.at("activation").get<std::string>());
  l.weight = tensor_from_json(j.at("weight"), out, in, name + ".weight");
  l.bias = vector_from_json(j.at("bias"), out, name + ".bias");
  return l;
}

json lstm_json(const std::string& name, const nn::LstmLayer<double>& l) {
  json gates = json::object();
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& g = l.gates[k];
    gates[nn::kGateNames[k]] = json{{"W", tensor_json(g.input_weight)},
                                    {"U", tensor_json(g.recurrent_weight)},
                                    {"b", tensor_json(g.bias)}};
  }
  return json{{"name", name},
              {"kind", "lstm"},
              {"inputs", l.inputs()},
              {"units", l.units()},
              {"return_sequences", l.return_sequences},
              {"gates", std::move(gates)}};
}

nn::LstmLayer<double> lstm_from_json(const json& j) {
  if (j.at("kind") != "lstm") throw ModelFormatError("expected an lstm layer");
  const auto name = j.at("name").get<std::string>();
  const Index in = j.at("inputs").get<Index>();
  const Index units = j.at("units").get<Index>();
  nn::LstmLayer<double> l;
  l.return_sequences = j.at("return_sequences").get<bool>();
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& g = j.at("gates").at(nn::kGateNames[k]);
    const std::string prefix = name + "." + nn::kGateNames[k];
    l.gates[k].input_weight = tensor_from_json(g.at("W"), units, in, prefix + ".W");
    l.gates[k].recurrent_weight = tensor_from_json(g.at("U"), units, units, prefix + ".U");
    l.gates[k].bias = vector_from_json(g.at("b"), units, prefix + ".b");
  }
  return l;
}

}  // namespace

std::string model_to_json(const ModelBundle& bundle) {
  json j;
  j["schema_version"] = kModelSchemaVersion;
  j["architecture"] = to_string(bundle.architecture());
  j["d"] = bundle.features();
  j["channels"] = bundle.channel_names;
  json layers = json::array();
  if (const auto* dense = std::get_if<DenseAE>(&bundle.network)) {
    for (std::size_t k = 0; k < dense->layers.size(); ++k) {
      layers.push_back(dense_json("dense" + std::to_string(k), dense->layers[k]));
    }
  } else {
    const auto& lstm = std::get<LstmAE>(bundle.network);
    j["T"] = lstm.window_length;
    layers.push_back(lstm_json("encoder1", lstm.encoder1));
    layers.push_back(lstm_json("encoder2", lstm.encoder2));
    layers.push_back(lstm_json("decoder1", lstm.decoder1));
    layers.push_back(lstm_json("decoder2", lstm.decoder2));
    layers.push_back(dense_json("head", lstm.head));
  }
  j["layers"] = std::move(layers);
  if (bundle.scaler) {
    j["scaler"] = json{{"min", tensor_json(bundle.scaler->min)},
                       {"max", tensor_json(bundle.scaler->max)},
                       {"fitted_on", bundle.scaler->fitted_on}};
  }
  if (bundle.threshold) {
    const auto& t = *bundle.threshold;
    j["threshold"] = json{{"alpha", t.alpha}, {"tau", t.tau}, {"kind", to_string(t.kind)}, {"fitted_on", t.fitted_on}};
  }
  if (bundle.covariance) {
    const auto& c = *bundle.covariance;
    j["covariance"] = json{{"sigma", tensor_json(c.sigma)},
                           {"inverse", tensor_json(c.inverse)},
                           {"inverse_sqrt", tensor_json(c.inverse_sqrt)},
                           {"shrinkage", c.shrinkage},
                           {"fitted_on", c.fitted_on}};
  }
  return j.dump(1) + "\n";
}

ModelBundle model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != kModelSchemaVersion) {
      throw ModelFormatError("unsupported model schema_version (expected " +
                             std::to_string(kModelSchemaVersion) + ")");
    }
    ModelBundle b;
    const auto arch = architecture_from_string(j.at("architecture").get<std::string>());
    const Index d = j.at("d").get<Index>();
    if (j.contains("channels")) b.channel_names = j.at("channels").get<std::vector<std::string>>();
    const auto& layers = j.at("layers");
    if (arch == Architecture::dense_ae) {
      DenseAE m;
      if (layers.size() != m.layers.size()) throw ModelFormatError("dense_ae needs 6 layers");
      for (std::size_t k = 0; k < m.layers.size(); ++k) m.layers[k] = dense_from_json(layers[k]);
      m.validate();
      b.network = std::move(m);
    } else {
      if (layers.size() != 5) throw ModelFormatError("lstm_ae needs 5 layers");
      LstmAE m;
      m.window_length = j.at("T").get<Index>();
      m.encoder1 = lstm_from_json(layers[0]);
      m.encoder2 = lstm_from_json(layers[1]);
      m.decoder1 = lstm_from_json(layers[2]);
      m.decoder2 = lstm_from_json(layers[3]);
      m.head = dense_from_json(layers[4]);
      m.validate();
      b.network = std::move(m);
    }
    if (b.features() != d) throw ModelFormatError("layer shapes disagree with d");
    if (!b.channel_names.empty() && static_cast<Index>(b.channel_names.size()) != d) {
      throw ModelFormatError("channel list length disagrees with d");
    }
    if (j.contains("scaler")) {
      const auto& s = j.at("scaler");
      ScalerParams p;
      p.min = vector_from_json(s.at("min"), d, "scaler.min");
      p.max = vector_from_json(s.at("max"), d, "scaler.max");
      p.fitted_on = s.at("fitted_on").get<Index>();
      b.scaler = std::move(p);
    }
    if (j.contains("threshold")) {
      const auto& t = j.at("threshold");
      ThresholdSpec spec;
      spec.alpha = t.at("alpha").get<double>();
      spec.tau = t.at("tau").get<double>();
      spec.kind = score_kind_from_string(t.at("kind").get<std::string>());
      spec.fitted_on = t.at("fitted_on").get<Index>();
      b.threshold = spec;
    }
    if (j.contains("covariance")) {
      const auto& c = j.at("covariance");
      CovarianceModel cov;
      cov.sigma = tensor_from_json(c.at("sigma"), d, d, "covariance.sigma");
      cov.inverse = tensor_from_json(c.at("inverse"), d, d, "covariance.inverse");
      cov.inverse_sqrt = tensor_from_json(c.at("inverse_sqrt"), d, d, "covariance.inverse_sqrt");
      cov.shrinkage = c.at("shrinkage").get<double>();
      cov.fitted_on = c.at("fitted_on").get<Index>();
      b.covariance = std::move(cov);
    }
    return b;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
  const std::string text = model_to_json(bundle);
  auto out = csv::open_output(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ModelBundle load_model(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace faultae
