#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rma/scheduler.hpp"

namespace rma {

// Mean squared error plus cosine distance between predicted and observed next
// features. The cosine term counts as a full miss (1.0) when either vector is
// numerically zero.
double loss_pre(const std::vector<double>& z_hat, const std::vector<double>& z);

struct PredcodeConfig {
  int input_dim = kFeatureDim;
  int hidden_dim = 64;
  double lambda = 0.1;  // weight of the prediction loss
  double lr = 1e-2;
  int epochs = 5;
  std::uint64_t seed = 0;
};

struct PredcodeSample {
  std::vector<double> x;  // feature at t
  std::vector<double> z;  // feature at t + 1
  int primitive = 0;      // 0..4, active primitive at t
  int keyframe = 0;       // 1 if t is a keyframe
};

inline constexpr int kPrimitiveClasses = 5;

// Two-layer head with a shared tanh trunk. One linear branch predicts the next
// feature vector, the other emits 5 primitive logits and a keyframe logit.
// Training is plain per-sample gradient descent in dataset order.
class PredictiveHead {
 public:
  explicit PredictiveHead(const PredcodeConfig& config);

  struct Forward {
    std::vector<double> a;       // hidden activations
    std::vector<double> z_hat;   // predicted next feature
    std::vector<double> logits;  // kPrimitiveClasses + 1 entries
  };
  Forward forward(const std::vector<double>& x) const;

  double sample_loss(const PredcodeSample& s) const;
  // Analytic gradient of sample_loss over the flattened parameter vector.
  std::vector<double> sample_gradient(const PredcodeSample& s) const;

  void train(const std::vector<PredcodeSample>& samples);
  double mean_loss(const std::vector<PredcodeSample>& samples) const;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  const PredcodeConfig& config() const { return config_; }

  void save(const std::string& path) const;
  static PredictiveHead load(const std::string& path);

 private:
  PredcodeConfig config_;
  std::vector<double> params_;  // W1, b1, W2, b2, Wc, bc flattened in order
};

// Largest relative error between analytic and central-difference gradients.
double gradient_check(const PredictiveHead& head, const PredcodeSample& sample,
                      double eps = 1e-5);

// Mean intra-class pairwise distance divided by mean inter-class pairwise
// distance over hidden activations; lower means better separated classes.
double separability(const std::vector<std::vector<double>>& hidden,
                    const std::vector<int>& labels);

// One training pair per consecutive frame span; idle frames carry no primitive
// label and are skipped. Keyframe labels come from the extractor run over the
// episode trajectory.
std::vector<PredcodeSample> samples_from_episode(const EpisodeLog& log,
                                                 const KinThresholds& thresholds, int nms_gap);

}  // namespace rma
