#pragma once

#include "mandcad/features.hpp"
#include "mandcad/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace mandcad {

enum class RoiLabel { Lesion, Normal };

struct LabeledSample {
  FeatureVector features;
  RoiLabel label = RoiLabel::Normal;
};

struct TrainingConfig {
  double learning_rate = 0.1;  // must lie in (0, 1]
  int epochs = 500;
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const {
    if (learning_rate <= 0.0 || learning_rate > 1.0)
      throw std::invalid_argument("TrainingConfig: learning_rate outside (0, 1]");
    if (epochs < 1) throw std::invalid_argument("TrainingConfig: epochs must be >= 1");
  }
};

/// Two-layer sigmoid perceptron with embedded z-score normalization of the
/// input features. The stock classifier is 15-10-2 (outputs: lesion, normal),
/// but any consistent dimensions work, which the tests use for small
/// hand-checkable networks.
struct MlpModel {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // output x hidden
  Eigen::VectorXd b2;
  Eigen::VectorXd feat_mean;
  Eigen::VectorXd feat_std;  // entries > 0; flat features are stored as 1
  TrainingConfig trained_with;

  int n_inputs() const { return static_cast<int>(w1.cols()); }
  int n_hidden() const { return static_cast<int>(w1.rows()); }
  int n_outputs() const { return static_cast<int>(w2.rows()); }
  void validate() const;
};

constexpr int kFeatureCount = 15;
constexpr int kHiddenUnits = 10;
constexpr int kOutputUnits = 2;

/// Fresh network with weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)],
/// zero biases, and identity normalization. Deterministic in the seed.
MlpModel init_network(std::uint64_t seed, int n_inputs = kFeatureCount,
                      int n_hidden = kHiddenUnits, int n_outputs = kOutputUnits);

struct Scores {
  double lesion = 0;
  double normal = 0;
};

/// Normalizes the features with the stored statistics and evaluates the
/// network. Both outputs are sigmoid activations in (0, 1).
Scores forward(const MlpModel& model, const Eigen::VectorXd& features);

/// 0.5 * squared error of the forward pass against a one-hot target.
double sample_loss(const MlpModel& model, const Eigen::VectorXd& features, RoiLabel label);

struct Gradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

/// Backpropagated gradients of sample_loss with respect to every parameter.
Gradients backprop(const MlpModel& model, const Eigen::VectorXd& features, RoiLabel label);

/// Per-sample stochastic gradient descent on the mean-squared error, with an
/// optional seeded shuffle each epoch. Normalization statistics come from the
/// training set only. Requires at least one sample of each class.
MlpModel train(const std::vector<LabeledSample>& samples, const TrainingConfig& config);

struct Classification {
  RoiLabel label = RoiLabel::Normal;
  double score = 0;  // lesion score, kept for FROC sweeps
};

/// Lesion iff the lesion score is >= threshold.
Classification classify(const MlpModel& model, const FeatureVector& features, double threshold);

/// Fraction of samples the model assigns to their recorded class at
/// threshold 0.5.
double training_accuracy(const MlpModel& model, const std::vector<LabeledSample>& samples);

// Model files are versioned JSON; round-trips restore every parameter
// bit-exactly.
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace mandcad
