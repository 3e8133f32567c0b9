#include "nts/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "binary_io.hpp"
#include "nts/error.hpp"
#include "nts/random.hpp"

namespace nts {

Network::Network(std::vector<std::size_t> sizes, Activation hidden, Activation output, std::size_t feedback_frames)
    : sizes_(std::move(sizes)), hidden_(hidden), output_(output), feedback_(feedback_frames) {
  if (sizes_.size() < 2) throw InvalidInput("network needs at least an input and an output layer");
  for (auto s : sizes_)
    if (s == 0) throw InvalidInput("layer size must be positive");
  if (hidden_ != Activation::Logistic && hidden_ != Activation::Tanh)
    throw InvalidInput("hidden activation must be logistic or tanh");
  if (output_ != Activation::Linear && output_ != Activation::Softmax)
    throw InvalidInput("output activation must be linear or softmax");
  if (feedback_ * output_size() >= input_size())
    throw InvalidInput("feedback frames leave no room for the base input");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    LayerParams p;
    p.in = sizes_[l];
    p.out = sizes_[l + 1];
    p.weights.assign(p.in * p.out, 0.0);
    p.bias.assign(p.out, 0.0);
    layers_.push_back(std::move(p));
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

void Network::initialize(std::uint64_t seed, double scale) {
  Rng rng(seed);
  for (auto& l : layers_) {
    const double r = scale / std::sqrt(static_cast<double>(l.in));
    for (auto& w : l.weights) w = rng.uniform(-r, r);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
}

Network make_network(std::vector<std::size_t> sizes, Activation hidden, Activation output, const TrainConfig& cfg,
                     std::size_t feedback_frames) {
  Network net(std::move(sizes), hidden, output, feedback_frames);
  net.initialize(cfg.seed, cfg.init_scale);
  return net;
}

namespace {

void activate(Activation a, std::vector<double>& v) {
  switch (a) {
    case Activation::Logistic:
      for (auto& x : v) x = 1.0 / (1.0 + std::exp(-x));
      break;
    case Activation::Tanh:
      for (auto& x : v) x = std::tanh(x);
      break;
    case Activation::Linear:
      break;
    case Activation::Softmax: {
      const double mx = *std::max_element(v.begin(), v.end());
      double sum = 0.0;
      for (auto& x : v) sum += (x = std::exp(x - mx));
      for (auto& x : v) x /= sum;
      break;
    }
  }
}

// y = x W + b, skipping zero inputs (one-hot heavy encodings).
void affine(const LayerParams& p, std::span<const double> x, std::vector<double>& y) {
  y.assign(p.bias.begin(), p.bias.end());
  for (std::size_t i = 0; i < p.in; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = &p.weights[i * p.out];
    for (std::size_t o = 0; o < p.out; ++o) y[o] += xi * row[o];
  }
}

/// Activations of every layer, index 0 being the input.
struct Trace {
  std::vector<std::vector<double>> act;
};

void run(const Network& net, std::span<const double> input, Trace& t) {
  if (input.size() != net.input_size())
    throw InvalidInput("input has " + std::to_string(input.size()) + " values, network expects " +
                       std::to_string(net.input_size()));
  const auto& layers = net.layers();
  t.act.resize(layers.size() + 1);
  t.act[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    affine(layers[l], t.act[l], t.act[l + 1]);
    activate(l + 1 == layers.size() ? net.output_activation() : net.hidden_activation(), t.act[l + 1]);
  }
}

double sample_loss(const std::vector<double>& y, const std::vector<double>& target, Loss loss) {
  double sum = 0.0;
  if (loss == Loss::MeanSquared) {
    for (std::size_t i = 0; i < y.size(); ++i) sum += 0.5 * (y[i] - target[i]) * (y[i] - target[i]);
  } else {
    for (std::size_t i = 0; i < y.size(); ++i)
      if (target[i] != 0.0) sum -= target[i] * std::log(std::max(y[i], 1e-300));
  }
  return sum;
}

void check_sample(const Network& net, const Sample& s, Loss loss) {
  if (s.target.size() != net.output_size())
    throw InvalidInput("target has " + std::to_string(s.target.size()) + " values, network outputs " +
                       std::to_string(net.output_size()));
  if (loss == Loss::CrossEntropy && net.output_activation() != Activation::Softmax)
    throw InvalidInput("cross-entropy loss requires a softmax output");
}

Gradient zero_like(const Network& net) {
  Gradient g;
  for (const auto& l : net.layers()) {
    LayerParams p;
    p.in = l.in;
    p.out = l.out;
    p.weights.assign(l.weights.size(), 0.0);
    p.bias.assign(l.bias.size(), 0.0);
    g.push_back(std::move(p));
  }
  return g;
}

// Accumulates d loss / d params of one sample into g; returns the loss.
double backprop(const Network& net, const Sample& s, Loss loss, Trace& t, Gradient& g) {
  run(net, s.input, t);
  const auto& layers = net.layers();
  const auto& y = t.act.back();
  const double value = sample_loss(y, s.target, loss);

  std::vector<double> delta(y.size());
  if (loss == Loss::CrossEntropy) {
    double tsum = 0.0;
    for (double v : s.target) tsum += v;
    for (std::size_t i = 0; i < y.size(); ++i) delta[i] = y[i] * tsum - s.target[i];
  } else if (net.output_activation() == Activation::Softmax) {
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += (y[i] - s.target[i]) * y[i];
    for (std::size_t i = 0; i < y.size(); ++i) delta[i] = y[i] * ((y[i] - s.target[i]) - dot);
  } else {
    for (std::size_t i = 0; i < y.size(); ++i) delta[i] = y[i] - s.target[i];
  }

  std::vector<double> prev;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& p = layers[l];
    const auto& x = t.act[l];
    auto& gl = g[l];
    for (std::size_t o = 0; o < p.out; ++o) gl.bias[o] += delta[o];
    for (std::size_t i = 0; i < p.in; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      double* row = &gl.weights[i * p.out];
      for (std::size_t o = 0; o < p.out; ++o) row[o] += xi * delta[o];
    }
    if (l == 0) break;
    prev.assign(p.in, 0.0);
    for (std::size_t i = 0; i < p.in; ++i) {
      const double* row = &p.weights[i * p.out];
      double sum = 0.0;
      for (std::size_t o = 0; o < p.out; ++o) sum += row[o] * delta[o];
      const double a = x[i];
      prev[i] = sum * (net.hidden_activation() == Activation::Tanh ? 1.0 - a * a : a * (1.0 - a));
    }
    delta.swap(prev);
  }
  return value;
}

}  // namespace

std::vector<double> forward(const Network& net, std::span<const double> input) {
  Trace t;
  run(net, input, t);
  return std::move(t.act.back());
}

double loss_value(const Network& net, const Sample& sample, Loss loss) {
  check_sample(net, sample, loss);
  return sample_loss(forward(net, sample.input), sample.target, loss);
}

Gradient grad(const Network& net, const Sample& sample, Loss loss, double* loss_out) {
  check_sample(net, sample, loss);
  Gradient g = zero_like(net);
  Trace t;
  const double v = backprop(net, sample, loss, t, g);
  if (loss_out) *loss_out = v;
  return g;
}

double gradient_check(const Network& net, const Sample& sample, Loss loss, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("gradient_check: eps must be positive");
  const Gradient analytic = grad(net, sample, loss);
  Network probe = net;
  double worst = 0.0;
  auto compare = [&](double& param, double a) {
    const double saved = param;
    param = saved + eps;
    const double up = loss_value(probe, sample, loss);
    param = saved - eps;
    const double down = loss_value(probe, sample, loss);
    param = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  };
  for (std::size_t l = 0; l < probe.layers().size(); ++l) {
    auto& p = probe.layers()[l];
    for (std::size_t k = 0; k < p.weights.size(); ++k) compare(p.weights[k], analytic[l].weights[k]);
    for (std::size_t k = 0; k < p.bias.size(); ++k) compare(p.bias[k], analytic[l].bias[k]);
  }
  return worst;
}

TrainResult train(Network net, std::span<const Sample> data, const TrainConfig& cfg) {
  if (data.empty()) throw InvalidInput("train: empty dataset");
  if (cfg.epochs < 1) throw InvalidInput("train: epochs must be >= 1");
  if (cfg.learning_rate < 0.0) throw InvalidInput("train: learning rate must be non-negative");
  if (cfg.batch_size < 1) throw InvalidInput("train: batch size must be >= 1");
  for (const auto& s : data) {
    check_sample(net, s, cfg.loss);
    if (s.input.size() != net.input_size()) throw InvalidInput("train: sample input size mismatch");
  }

  Rng rng(cfg.seed ^ 0x5eedf00dULL);
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Gradient g = zero_like(net), velocity = zero_like(net);
  Trace t;
  TrainResult result;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (auto& l : g) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
      }
      for (std::size_t k = start; k < end; ++k) total += backprop(net, data[order[k]], cfg.loss, t, g);
      const double scale = cfg.learning_rate / static_cast<double>(end - start);
      for (std::size_t l = 0; l < g.size(); ++l) {
        auto& p = net.layers()[l];
        auto& v = velocity[l];
        for (std::size_t k = 0; k < p.weights.size(); ++k) {
          v.weights[k] = cfg.momentum * v.weights[k] - scale * g[l].weights[k];
          p.weights[k] += v.weights[k];
        }
        for (std::size_t k = 0; k < p.bias.size(); ++k) {
          v.bias[k] = cfg.momentum * v.bias[k] - scale * g[l].bias[k];
          p.bias[k] += v.bias[k];
        }
      }
    }
    const double mean = total / static_cast<double>(data.size());
    if (!std::isfinite(mean))
      throw ModelError("training diverged: non-finite loss at epoch " + std::to_string(epoch + 1) +
                       " (learning rate " + std::to_string(cfg.learning_rate) + ")");
    result.loss_curve.push_back(mean);
  }
  result.net = std::move(net);
  return result;
}

std::vector<double> assemble_window(std::span<const std::vector<double>> frames, std::ptrdiff_t center,
                                    std::size_t radius, std::span<const double> pad) {
  std::vector<double> out;
  const auto r = static_cast<std::ptrdiff_t>(radius);
  for (std::ptrdiff_t k = center - r; k <= center + r; ++k) {
    if (k >= 0 && k < static_cast<std::ptrdiff_t>(frames.size())) {
      const auto& f = frames[static_cast<std::size_t>(k)];
      out.insert(out.end(), f.begin(), f.end());
    } else {
      out.insert(out.end(), pad.begin(), pad.end());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'N', 'T', 'S', 'N', 'E', 'T', '0', '1'};
}

std::vector<unsigned char> serialize(const Network& net) {
  detail::ByteWriter w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kWeightFormatVersion);
  w.u32(static_cast<std::uint32_t>(net.hidden_activation()));
  w.u32(static_cast<std::uint32_t>(net.output_activation()));
  w.u32(static_cast<std::uint32_t>(net.feedback_frames()));
  w.u64(net.sizes().size());
  for (auto s : net.sizes()) w.u64(s);
  for (const auto& l : net.layers()) {
    for (double v : l.weights) w.f64(v);
    for (double v : l.bias) w.f64(v);
  }
  return std::move(w.bytes());
}

Network deserialize(std::span<const unsigned char> bytes) {
  detail::ByteReader<ModelError> r(bytes);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic)))
    throw ModelError("not a network weight file (bad magic)");
  const auto version = r.u32();
  if (version != kWeightFormatVersion)
    throw ModelError("weight file version " + std::to_string(version) + ", expected " +
                     std::to_string(kWeightFormatVersion));
  const auto hidden = r.u32(), output = r.u32(), feedback = r.u32();
  const auto count = r.u64();
  if (count < 2 || count > 64) throw ModelError("implausible layer count " + std::to_string(count));
  std::vector<std::size_t> sizes;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto s = r.u64();
    if (s == 0 || s > (1u << 24)) throw ModelError("implausible layer size " + std::to_string(s));
    sizes.push_back(static_cast<std::size_t>(s));
  }
  if (hidden > 3 || output > 3) throw ModelError("unknown activation code");
  Network net;
  try {
    net = Network(sizes, static_cast<Activation>(hidden), static_cast<Activation>(output), feedback);
  } catch (const InvalidInput& e) {
    throw ModelError(std::string("inconsistent weight file header: ") + e.what());
  }
  for (auto& l : net.layers()) {
    if (r.remaining() < (l.weights.size() + l.bias.size()) * sizeof(double))
      throw ModelError("weight file truncated");
    for (auto& v : l.weights) v = r.f64();
    for (auto& v : l.bias) v = r.f64();
  }
  if (!r.done()) throw ModelError("weight file has trailing bytes (size mismatch)");
  return net;
}

void save_weights(const Network& net, const std::filesystem::path& path) {
  const auto bytes = serialize(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

Network load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open weight file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize(bytes);
  } catch (const ModelError& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
}

}  // namespace nts
