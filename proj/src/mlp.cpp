#include "mandcad/mlp.hpp"

#include "mandcad/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace mandcad {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Eigen::VectorXd one_hot(RoiLabel label, int n_outputs) {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(n_outputs);
  t[label == RoiLabel::Lesion ? 0 : 1] = 1.0;
  return t;
}

struct ForwardTrace {
  Eigen::VectorXd x;  // normalized input
  Eigen::VectorXd hidden;
  Eigen::VectorXd output;
};

ForwardTrace forward_trace(const MlpModel& model, const Eigen::VectorXd& features) {
  if (features.size() != model.n_inputs())
    throw std::invalid_argument("forward: feature dimension mismatch");
  if (!features.allFinite()) throw std::invalid_argument("forward: non-finite feature");
  ForwardTrace t;
  t.x = (features - model.feat_mean).cwiseQuotient(model.feat_std);
  t.hidden = sigmoid(model.w1 * t.x + model.b1);
  t.output = sigmoid(model.w2 * t.hidden + model.b2);
  return t;
}

}  // namespace

void MlpModel::validate() const {
  if (w1.rows() != b1.size() || w2.rows() != b2.size() || w2.cols() != w1.rows() ||
      feat_mean.size() != w1.cols() || feat_std.size() != w1.cols())
    throw std::invalid_argument("MlpModel: inconsistent dimensions");
  if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite() ||
      !feat_mean.allFinite() || !feat_std.allFinite())
    throw std::invalid_argument("MlpModel: non-finite parameter");
  if ((feat_std.array() <= 0.0).any())
    throw std::invalid_argument("MlpModel: feature stddev entries must be positive");
}

MlpModel init_network(std::uint64_t seed, int n_inputs, int n_hidden, int n_outputs) {
  if (n_inputs < 1 || n_hidden < 1 || n_outputs < 1)
    throw std::invalid_argument("init_network: layer sizes must be positive");
  Rng rng(derive_seed(seed, 0x6d6c70));
  auto fill = [&rng](Eigen::MatrixXd& m, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
  };
  MlpModel model;
  model.w1.resize(n_hidden, n_inputs);
  model.w2.resize(n_outputs, n_hidden);
  fill(model.w1, n_inputs);
  fill(model.w2, n_hidden);
  model.b1 = Eigen::VectorXd::Zero(n_hidden);
  model.b2 = Eigen::VectorXd::Zero(n_outputs);
  model.feat_mean = Eigen::VectorXd::Zero(n_inputs);
  model.feat_std = Eigen::VectorXd::Ones(n_inputs);
  return model;
}

Scores forward(const MlpModel& model, const Eigen::VectorXd& features) {
  const ForwardTrace t = forward_trace(model, features);
  if (model.n_outputs() != 2) throw std::invalid_argument("forward: expected two output units");
  return {t.output[0], t.output[1]};
}

double sample_loss(const MlpModel& model, const Eigen::VectorXd& features, RoiLabel label) {
  const ForwardTrace t = forward_trace(model, features);
  return 0.5 * (t.output - one_hot(label, model.n_outputs())).squaredNorm();
}

Gradients backprop(const MlpModel& model, const Eigen::VectorXd& features, RoiLabel label) {
  const ForwardTrace t = forward_trace(model, features);
  const Eigen::VectorXd target = one_hot(label, model.n_outputs());

  // delta = dL/dz with sigmoid activations and 0.5*||o - t||^2.
  const Eigen::VectorXd delta_out =
      (t.output - target).cwiseProduct(t.output.cwiseProduct(Eigen::VectorXd::Ones(t.output.size()) - t.output));
  const Eigen::VectorXd delta_hidden =
      (model.w2.transpose() * delta_out)
          .cwiseProduct(t.hidden.cwiseProduct(Eigen::VectorXd::Ones(t.hidden.size()) - t.hidden));

  Gradients g;
  g.w2 = delta_out * t.hidden.transpose();
  g.b2 = delta_out;
  g.w1 = delta_hidden * t.x.transpose();
  g.b1 = delta_hidden;
  return g;
}

MlpModel train(const std::vector<LabeledSample>& samples, const TrainingConfig& config) {
  config.validate();
  std::size_t lesions = 0;
  for (const auto& s : samples) lesions += (s.label == RoiLabel::Lesion);
  if (lesions == 0 || lesions == samples.size())
    throw std::invalid_argument("train: need at least one sample of each class");

  MlpModel model = init_network(config.seed);
  model.trained_with = config;

  const int dim = model.n_inputs();
  const double n = static_cast<double>(samples.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& s : samples) mean += s.features;
  mean /= n;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
  for (const auto& s : samples) var += (s.features - mean).cwiseAbs2();
  var /= n;
  model.feat_mean = mean;
  model.feat_std = var.cwiseSqrt().unaryExpr([](double s) { return s > 0.0 ? s : 1.0; });

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(derive_seed(config.seed, 0x7368));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) shuffle_rng.shuffle(order);
    for (const std::size_t idx : order) {
      const auto& s = samples[idx];
      const Gradients g = backprop(model, s.features, s.label);
      model.w1 -= config.learning_rate * g.w1;
      model.b1 -= config.learning_rate * g.b1;
      model.w2 -= config.learning_rate * g.w2;
      model.b2 -= config.learning_rate * g.b2;
    }
  }
  return model;
}

Classification classify(const MlpModel& model, const FeatureVector& features, double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw std::invalid_argument("classify: threshold outside [0, 1]");
  const Scores s = forward(model, features);
  return {s.lesion >= threshold ? RoiLabel::Lesion : RoiLabel::Normal, s.lesion};
}

double training_accuracy(const MlpModel& model, const std::vector<LabeledSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("training_accuracy: no samples");
  std::size_t correct = 0;
  for (const auto& s : samples)
    correct += (classify(model, s.features, 0.5).label == s.label);
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw FormatError("model file: bad matrix row count");
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      throw FormatError("model file: bad matrix column count");
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, int size) {
  if (!j.is_array() || static_cast<int>(j.size()) != size)
    throw FormatError("model file: bad vector length");
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v[i] = j[i].get<double>();
  return v;
}

constexpr const char* kModelFormat = "mandcad-mlp";
constexpr int kModelVersion = 1;

}  // namespace

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  model.validate();
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["n_inputs"] = model.n_inputs();
  j["n_hidden"] = model.n_hidden();
  j["n_outputs"] = model.n_outputs();
  j["w1"] = matrix_to_json(model.w1);
  j["b1"] = matrix_to_json(model.b1);
  j["w2"] = matrix_to_json(model.w2);
  j["b2"] = matrix_to_json(model.b2);
  j["feat_mean"] = matrix_to_json(model.feat_mean);
  j["feat_std"] = matrix_to_json(model.feat_std);
  j["training"] = {{"learning_rate", model.trained_with.learning_rate},
                   {"epochs", model.trained_with.epochs},
                   {"seed", model.trained_with.seed},
                   {"shuffle", model.trained_with.shuffle}};

  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(1) << '\n';
  if (!out) throw IoError("write failed on '" + path.string() + "'");
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model file '" + path.string() + "': " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kModelFormat)
      throw FormatError("model file '" + path.string() + "': unknown format tag");
    if (j.at("version").get<int>() != kModelVersion)
      throw FormatError("model file '" + path.string() + "': unsupported version");
    const int ni = j.at("n_inputs").get<int>();
    const int nh = j.at("n_hidden").get<int>();
    const int no = j.at("n_outputs").get<int>();
    if (ni < 1 || nh < 1 || no < 1) throw FormatError("model file: bad dimensions");

    MlpModel model;
    model.w1 = matrix_from_json(j.at("w1"), nh, ni);
    model.b1 = matrix_from_json(j.at("b1"), nh, 1);
    model.w2 = matrix_from_json(j.at("w2"), no, nh);
    model.b2 = matrix_from_json(j.at("b2"), no, 1);
    model.feat_mean = matrix_from_json(j.at("feat_mean"), ni, 1);
    model.feat_std = matrix_from_json(j.at("feat_std"), ni, 1);
    const auto& t = j.at("training");
    model.trained_with.learning_rate = t.at("learning_rate").get<double>();
    model.trained_with.epochs = t.at("epochs").get<int>();
    model.trained_with.seed = t.at("seed").get<std::uint64_t>();
    model.trained_with.shuffle = t.at("shuffle").get<bool>();
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model file '" + path.string() + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError("model file '" + path.string() + "': " + e.what());
  }
}

}  // namespace mandcad
