#include "rma/predcode.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "rma/rng.hpp"

namespace rma {

using nlohmann::json;

namespace {

constexpr double kNormFloor = 1e-12;

double vec_norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double vec_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double loss_pre(const std::vector<double>& z_hat, const std::vector<double>& z) {
  if (z_hat.size() != z.size() || z.empty())
    throw ConfigError("loss_pre needs equal-length nonempty vectors");
  double mse = 0;
  for (size_t i = 0; i < z.size(); ++i) mse += (z_hat[i] - z[i]) * (z_hat[i] - z[i]);
  mse /= static_cast<double>(z.size());

  const double n1 = vec_norm(z_hat);
  const double n2 = vec_norm(z);
  const double cos = (n1 < kNormFloor || n2 < kNormFloor) ? 0.0 : vec_dot(z_hat, z) / (n1 * n2);
  return mse + (1.0 - cos);
}

namespace {

// Flattened parameter layout: W1[H*D], b1[H], W2[D*H], b2[D], Wc[C*H], bc[C]
// with C = kPrimitiveClasses + 1.
struct Layout {
  int D, H, C;
  int w1, b1, w2, b2, wc, bc, total;

  explicit Layout(const PredcodeConfig& cfg)
      : D(cfg.input_dim), H(cfg.hidden_dim), C(kPrimitiveClasses + 1) {
    w1 = 0;
    b1 = w1 + H * D;
    w2 = b1 + H;
    b2 = w2 + D * H;
    wc = b2 + D;
    bc = wc + C * H;
    total = bc + C;
  }
};

}  // namespace

PredictiveHead::PredictiveHead(const PredcodeConfig& config) : config_(config) {
  if (config.input_dim < 1 || config.hidden_dim < 1)
    throw ConfigError("predcode dims must be positive");
  const Layout lay(config_);
  params_.resize(lay.total);
  Rng rng(derive_seed(config.seed, 0x70636f6465ULL));
  for (double& p : params_) p = rng.uniform(-0.1, 0.1);
}

PredictiveHead::Forward PredictiveHead::forward(const std::vector<double>& x) const {
  const Layout lay(config_);
  if (static_cast<int>(x.size()) != lay.D) throw ConfigError("input size mismatch");

  Forward f;
  f.a.resize(lay.H);
  for (int h = 0; h < lay.H; ++h) {
    double s = params_[lay.b1 + h];
    for (int d = 0; d < lay.D; ++d) s += params_[lay.w1 + h * lay.D + d] * x[d];
    f.a[h] = std::tanh(s);
  }
  f.z_hat.resize(lay.D);
  for (int i = 0; i < lay.D; ++i) {
    double s = params_[lay.b2 + i];
    for (int h = 0; h < lay.H; ++h) s += params_[lay.w2 + i * lay.H + h] * f.a[h];
    f.z_hat[i] = s;
  }
  f.logits.resize(lay.C);
  for (int j = 0; j < lay.C; ++j) {
    double s = params_[lay.bc + j];
    for (int h = 0; h < lay.H; ++h) s += params_[lay.wc + j * lay.H + h] * f.a[h];
    f.logits[j] = s;
  }
  return f;
}

namespace {

// Softmax probabilities over the primitive logits, numerically shifted.
std::vector<double> softmax5(const std::vector<double>& logits) {
  double mx = logits[0];
  for (int j = 1; j < kPrimitiveClasses; ++j) mx = std::max(mx, logits[j]);
  std::vector<double> p(kPrimitiveClasses);
  double sum = 0;
  for (int j = 0; j < kPrimitiveClasses; ++j) {
    p[j] = std::exp(logits[j] - mx);
    sum += p[j];
  }
  for (double& v : p) v /= sum;
  return p;
}

double bce_logit(double k, int y) {
  // max(k,0) - k*y + log(1 + exp(-|k|)) is the stable form.
  return std::max(k, 0.0) - k * y + std::log1p(std::exp(-std::fabs(k)));
}

}  // namespace

double PredictiveHead::sample_loss(const PredcodeSample& s) const {
  if (s.primitive < 0 || s.primitive >= kPrimitiveClasses)
    throw ConfigError("primitive label out of range");
  const Forward f = forward(s.x);
  const std::vector<double> p = softmax5(f.logits);
  const double ce = -std::log(std::max(p[s.primitive], 1e-300));
  const double bce = bce_logit(f.logits[kPrimitiveClasses], s.keyframe);
  return ce + bce + config_.lambda * loss_pre(f.z_hat, s.z);
}

std::vector<double> PredictiveHead::sample_gradient(const PredcodeSample& s) const {
  const Layout lay(config_);
  const Forward f = forward(s.x);
  std::vector<double> grad(lay.total, 0.0);

  std::vector<double> dlogits(lay.C);
  const std::vector<double> p = softmax5(f.logits);
  for (int j = 0; j < kPrimitiveClasses; ++j) dlogits[j] = p[j] - (j == s.primitive ? 1.0 : 0.0);
  const double k = f.logits[kPrimitiveClasses];
  dlogits[kPrimitiveClasses] = 1.0 / (1.0 + std::exp(-k)) - s.keyframe;

  std::vector<double> dz(lay.D, 0.0);
  const double n1 = vec_norm(f.z_hat);
  const double n2 = vec_norm(s.z);
  const bool degenerate = n1 < kNormFloor || n2 < kNormFloor;
  const double dot = degenerate ? 0.0 : vec_dot(f.z_hat, s.z);
  for (int i = 0; i < lay.D; ++i) {
    double g = 2.0 / lay.D * (f.z_hat[i] - s.z[i]);
    if (!degenerate)
      g += -(s.z[i] / (n1 * n2) - dot * f.z_hat[i] / (n1 * n1 * n1 * n2));
    dz[i] = config_.lambda * g;
  }

  std::vector<double> da(lay.H, 0.0);
  for (int i = 0; i < lay.D; ++i)
    for (int h = 0; h < lay.H; ++h) da[h] += params_[lay.w2 + i * lay.H + h] * dz[i];
  for (int j = 0; j < lay.C; ++j)
    for (int h = 0; h < lay.H; ++h) da[h] += params_[lay.wc + j * lay.H + h] * dlogits[j];

  for (int h = 0; h < lay.H; ++h) {
    const double dpre = (1.0 - f.a[h] * f.a[h]) * da[h];
    grad[lay.b1 + h] = dpre;
    for (int d = 0; d < lay.D; ++d) grad[lay.w1 + h * lay.D + d] = dpre * s.x[d];
  }
  for (int i = 0; i < lay.D; ++i) {
    grad[lay.b2 + i] = dz[i];
    for (int h = 0; h < lay.H; ++h) grad[lay.w2 + i * lay.H + h] = dz[i] * f.a[h];
  }
  for (int j = 0; j < lay.C; ++j) {
    grad[lay.bc + j] = dlogits[j];
    for (int h = 0; h < lay.H; ++h) grad[lay.wc + j * lay.H + h] = dlogits[j] * f.a[h];
  }
  return grad;
}

void PredictiveHead::train(const std::vector<PredcodeSample>& samples) {
  for (int epoch = 0; epoch < config_.epochs; ++epoch)
    for (const auto& s : samples) {
      const std::vector<double> g = sample_gradient(s);
      for (size_t i = 0; i < params_.size(); ++i) params_[i] -= config_.lr * g[i];
    }
}

double PredictiveHead::mean_loss(const std::vector<PredcodeSample>& samples) const {
  if (samples.empty()) throw ConfigError("mean_loss over empty sample set");
  double sum = 0;
  for (const auto& s : samples) sum += sample_loss(s);
  return sum / samples.size();
}

double gradient_check(const PredictiveHead& head, const PredcodeSample& sample, double eps) {
  PredictiveHead probe = head;
  const std::vector<double> analytic = head.sample_gradient(sample);
  double worst = 0;
  for (size_t i = 0; i < probe.params().size(); ++i) {
    const double keep = probe.params()[i];
    probe.params()[i] = keep + eps;
    const double hi = probe.sample_loss(sample);
    probe.params()[i] = keep - eps;
    const double lo = probe.sample_loss(sample);
    probe.params()[i] = keep;
    const double numeric = (hi - lo) / (2 * eps);
    const double err =
        std::fabs(analytic[i] - numeric) / std::max({1.0, std::fabs(analytic[i]), std::fabs(numeric)});
    worst = std::max(worst, err);
  }
  return worst;
}

double separability(const std::vector<std::vector<double>>& hidden,
                    const std::vector<int>& labels) {
  if (hidden.size() != labels.size() || hidden.size() < 2)
    throw ConfigError("separability needs matched hidden/label vectors");
  double intra = 0, inter = 0;
  long intra_n = 0, inter_n = 0;
  for (size_t i = 0; i < hidden.size(); ++i)
    for (size_t j = i + 1; j < hidden.size(); ++j) {
      double d2 = 0;
      for (size_t k = 0; k < hidden[i].size(); ++k) {
        const double diff = hidden[i][k] - hidden[j][k];
        d2 += diff * diff;
      }
      const double d = std::sqrt(d2);
      if (labels[i] == labels[j]) {
        intra += d;
        ++intra_n;
      } else {
        inter += d;
        ++inter_n;
      }
    }
  if (intra_n == 0 || inter_n == 0) throw ConfigError("separability needs both classes present");
  const double mean_inter = inter / inter_n;
  if (mean_inter <= 0) throw ConfigError("degenerate hidden activations");
  return (intra / intra_n) / mean_inter;
}

std::vector<PredcodeSample> samples_from_episode(const EpisodeLog& log,
                                                 const KinThresholds& thresholds, int nms_gap) {
  std::vector<PredcodeSample> samples;
  if (log.frames.size() < 2) return samples;

  std::vector<TrajectoryFrame> traj;
  traj.reserve(log.frames.size());
  for (const auto& f : log.frames) {
    TrajectoryFrame t;
    t.t = f.t;
    t.g = f.g;
    t.v = f.v;
    t.pos = f.pos;
    traj.push_back(t);
  }
  const KeyframeSet keys = extract_keyframes(traj, thresholds, nms_gap);
  const std::set<int> flagged(keys.indices.begin(), keys.indices.end());

  std::map<int, Primitive> primitive_of;
  for (const auto& a : log.attempts) primitive_of[a.step_id] = a.primitive;

  for (size_t i = 0; i + 1 < log.frames.size(); ++i) {
    const auto& f = log.frames[i];
    if (f.step_id == 0) continue;  // idle or synthesized step, no label
    auto it = primitive_of.find(f.step_id);
    if (it == primitive_of.end()) continue;
    PredcodeSample s;
    s.x = f.feature;
    s.z = log.frames[i + 1].feature;
    s.primitive = static_cast<int>(it->second);
    s.keyframe = flagged.count(f.t) ? 1 : 0;
    samples.push_back(std::move(s));
  }
  return samples;
}

void PredictiveHead::save(const std::string& path) const {
  json j;
  j["schema"] = "rma-predcode-v1";
  j["input_dim"] = config_.input_dim;
  j["hidden_dim"] = config_.hidden_dim;
  j["lambda"] = config_.lambda;
  j["lr"] = config_.lr;
  j["epochs"] = config_.epochs;
  j["seed"] = config_.seed;
  j["params"] = params_;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write head file: " + path);
  out << j.dump(2) << "\n";
}

PredictiveHead PredictiveHead::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open head file: " + path);
  json j;
  in >> j;
  if (j.at("schema").get<std::string>() != "rma-predcode-v1")
    throw ConfigError("unexpected head schema");
  PredcodeConfig cfg;
  cfg.input_dim = j.at("input_dim").get<int>();
  cfg.hidden_dim = j.at("hidden_dim").get<int>();
  cfg.lambda = j.at("lambda").get<double>();
  cfg.lr = j.at("lr").get<double>();
  cfg.epochs = j.at("epochs").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  PredictiveHead head(cfg);
  head.params_ = j.at("params").get<std::vector<double>>();
  const Layout lay(cfg);
  if (static_cast<int>(head.params_.size()) != lay.total)
    throw ConfigError("head parameter count mismatch");
  return head;
}

}  // namespace rma
