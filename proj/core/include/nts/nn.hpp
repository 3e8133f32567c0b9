#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace nts {

enum class Activation : std::uint32_t { Logistic = 0, Tanh = 1, Linear = 2, Softmax = 3 };
enum class Loss { MeanSquared, CrossEntropy };

/// Weights stored input-major: weights[i * out + o] connects input i to output o.
struct LayerParams {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t i, std::size_t o) { return weights[i * out + o]; }
  double w(std::size_t i, std::size_t o) const { return weights[i * out + o]; }
  bool operator==(const LayerParams&) const = default;
};

/// Fully connected feedforward net. With a feedback spec of k frames the
/// last k * output_size inputs hold the previous k outputs, newest first.
class Network {
 public:
  Network() = default;
  /// All weights zero. `sizes` includes the input and output layer.
  Network(std::vector<std::size_t> sizes, Activation hidden, Activation output, std::size_t feedback_frames = 0);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  std::size_t feedback_frames() const { return feedback_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t base_input_size() const { return input_size() - feedback_ * output_size(); }

  std::vector<LayerParams>& layers() { return layers_; }
  const std::vector<LayerParams>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  /// Uniform weights in +-scale/sqrt(fan_in), zero biases.
  void initialize(std::uint64_t seed, double scale = 1.0);

  bool operator==(const Network&) const = default;

 private:
  std::vector<std::size_t> sizes_;
  Activation hidden_ = Activation::Tanh;
  Activation output_ = Activation::Linear;
  std::size_t feedback_ = 0;
  std::vector<LayerParams> layers_;
};

struct Sample {
  std::vector<double> input;
  std::vector<double> target;
};

using Gradient = std::vector<LayerParams>;

std::vector<double> forward(const Network& net, std::span<const double> input);

/// Loss of one sample: MSE is 0.5 * sum (y - t)^2, cross-entropy is
/// -sum t log y and requires a softmax output.
double loss_value(const Network& net, const Sample& sample, Loss loss);

/// Exact gradient of loss_value with respect to every weight and bias.
Gradient grad(const Network& net, const Sample& sample, Loss loss, double* loss_out = nullptr);

/// Largest component-wise relative error between grad() and central finite
/// differences. Relative error is |a - n| / max(|a|, |n|, 1e-6); the floor
/// keeps components that are zero analytically from dividing round-off by
/// round-off.
double gradient_check(const Network& net, const Sample& sample, Loss loss, double eps = 1e-5);

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  double init_scale = 1.0;
  Loss loss = Loss::MeanSquared;
};

struct TrainResult {
  Network net;
  std::vector<double> loss_curve;  // mean per-sample loss of each epoch
};

/// Minibatch SGD with momentum. The seed drives the shuffling order; the
/// net is trained from the weights it arrives with.
TrainResult train(Network net, std::span<const Sample> data, const TrainConfig& cfg);

/// Fresh net initialized from cfg.seed and cfg.init_scale.
Network make_network(std::vector<std::size_t> sizes, Activation hidden, Activation output,
                     const TrainConfig& cfg, std::size_t feedback_frames = 0);

/// Concatenation of frames[center - radius .. center + radius]; positions
/// outside the sequence contribute `pad`.
std::vector<double> assemble_window(std::span<const std::vector<double>> frames, std::ptrdiff_t center,
                                    std::size_t radius, std::span<const double> pad);

// Binary weight file, little-endian:
//   8 bytes magic "NTSNET01", u32 format version, u32 hidden activation,
//   u32 output activation, u32 feedback frames, u64 layer-size count,
//   u64 sizes..., then per layer its weights (input-major) and biases as f64.
inline constexpr std::uint32_t kWeightFormatVersion = 1;

void save_weights(const Network& net, const std::filesystem::path& path);
Network load_weights(const std::filesystem::path& path);
std::vector<unsigned char> serialize(const Network& net);
Network deserialize(std::span<const unsigned char> bytes);

}  // namespace nts
