#include <cmath>
#include <random>

#include "eventcube/error.hpp"
#include "eventcube/sae/model.hpp"
#include "sae_ops.hpp"

namespace eventcube::sae {

namespace {

detail::PatchGeometry conv_geometry(const Shape& image, const Shape& grid, const LayerSpec& layer) {
  detail::PatchGeometry g{};
  g.c = image.c;
  g.h = image.h;
  g.w = image.w;
  g.oh = grid.h;
  g.ow = grid.w;
  g.kh = layer.kernel_h;
  g.kw = layer.kernel_w;
  g.stride = layer.stride;
  g.pad_t = layer.stride == 1 ? static_cast<std::ptrdiff_t>((layer.kernel_h - 1) / 2) : 0;
  g.pad_l = layer.stride == 1 ? static_cast<std::ptrdiff_t>((layer.kernel_w - 1) / 2) : 0;
  return g;
}

}  // namespace

template <class T>
Autoencoder<T>::Autoencoder(const ArchSpec& arch, std::uint64_t seed) : arch_(arch), seed_(seed) {
  const std::vector<Shape> shapes = infer_encoder_shapes(arch_);
  input_size_ = shapes.front().size();

  std::size_t offset = 0;
  std::size_t stats_offset = 0;
  struct Init {
    std::size_t offset, size;
    double bound;
  };
  std::vector<Init> uniform_inits;
  std::vector<std::pair<std::size_t, std::size_t>> ones;      // BN scale ranges
  std::vector<std::pair<std::size_t, std::size_t>> unit_var;  // running variance ranges

  auto add_group = [&](std::string name, ParamRole role, bool encoder, std::size_t size) {
    groups_.push_back({std::move(name), role, encoder, ops_.size(), offset, size});
    offset += size;
    return groups_.back().offset;
  };

  auto add_batch_norm = [&](const Shape& s, bool encoder, const std::string& prefix) {
    const bool image = s.kind == Shape::Kind::Image;
    const std::size_t channels = image ? s.c : s.size();
    const std::size_t spatial = image ? static_cast<std::size_t>(s.h) * s.w : 1;
    const std::size_t g = add_group(prefix + ".bn.scale", ParamRole::BnScale, encoder, channels);
    const std::size_t b = add_group(prefix + ".bn.shift", ParamRole::BnShift, encoder, channels);
    ones.emplace_back(g, channels);
    unit_var.emplace_back(stats_offset + channels, channels);
    ops_.push_back(std::make_shared<detail::BatchNormOp<T>>(channels, spatial, g, b, stats_offset,
                                                            arch_.bn_momentum, arch_.bn_epsilon));
    stats_offset += 2 * channels;
  };

  std::size_t first_linear = arch_.layers.size();
  for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
    if (arch_.layers[i].kind != LayerSpec::Kind::Flatten) {
      first_linear = i;
      break;
    }
  }
  const std::size_t bottleneck = arch_.layers.size() - 1;

  // Encoder: linear -> [batch norm] -> leaky ReLU. The bottleneck skips batch norm.
  for (std::size_t i = 0; i < arch_.layers.size(); ++i) {
    const LayerSpec& layer = arch_.layers[i];
    const Shape& in = shapes[i];
    const Shape& out = shapes[i + 1];
    const std::string prefix = "enc." + std::to_string(i);
    if (layer.kind == LayerSpec::Kind::Flatten) continue;
    if (layer.kind == LayerSpec::Kind::Dense) {
      const std::size_t w = add_group(prefix + ".dense.weight", ParamRole::Weight, true, in.size() * out.size());
      const std::size_t b = add_group(prefix + ".dense.bias", ParamRole::Bias, true, out.size());
      uniform_inits.push_back({w, in.size() * out.size(), 1.0 / std::sqrt(static_cast<double>(in.size()))});
      ops_.push_back(std::make_shared<detail::DenseOp<T>>(in.size(), out.size(), w, b));
    } else {
      const auto g = conv_geometry(in, out, layer);
      const std::size_t wsize = layer.filters * g.patch();
      const std::size_t w = add_group(prefix + ".conv.weight", ParamRole::Weight, true, wsize);
      const std::size_t b = add_group(prefix + ".conv.bias", ParamRole::Bias, true, layer.filters);
      uniform_inits.push_back({w, wsize, 1.0 / std::sqrt(static_cast<double>(g.patch()))});
      ops_.push_back(std::make_shared<detail::Conv2dOp<T>>(g, layer.filters, w, b));
    }
    if (i != bottleneck && arch_.batch_norm) add_batch_norm(out, true, prefix);
    ops_.push_back(std::make_shared<detail::LeakyReluOp<T>>(arch_.leaky_slope));
  }
  encoder_ops_ = ops_.size();

  // Decoder mirrors the encoder; its last layer is linear.
  for (std::size_t r = arch_.layers.size(); r-- > 0;) {
    const LayerSpec& layer = arch_.layers[r];
    if (layer.kind == LayerSpec::Kind::Flatten) continue;
    const Shape& in = shapes[r + 1];
    const Shape& out = shapes[r];
    const std::string prefix = "dec." + std::to_string(r);
    if (layer.kind == LayerSpec::Kind::Dense) {
      const std::size_t w = add_group(prefix + ".dense.weight", ParamRole::Weight, false, in.size() * out.size());
      const std::size_t b = add_group(prefix + ".dense.bias", ParamRole::Bias, false, out.size());
      uniform_inits.push_back({w, in.size() * out.size(), 1.0 / std::sqrt(static_cast<double>(in.size()))});
      ops_.push_back(std::make_shared<detail::DenseOp<T>>(in.size(), out.size(), w, b));
    } else {
      const auto g = conv_geometry(out, in, layer);
      const std::size_t wsize = layer.filters * g.patch();
      const std::size_t w = add_group(prefix + ".deconv.weight", ParamRole::Weight, false, wsize);
      const std::size_t b = add_group(prefix + ".deconv.bias", ParamRole::Bias, false, out.c);
      const std::size_t fan_in = layer.filters * g.kh * g.kw;
      uniform_inits.push_back({w, wsize, 1.0 / std::sqrt(static_cast<double>(fan_in))});
      ops_.push_back(std::make_shared<detail::ConvTranspose2dOp<T>>(g, layer.filters, w, b));
    }
    if (r == first_linear) break;
    if (arch_.batch_norm) add_batch_norm(out, false, prefix);
    ops_.push_back(std::make_shared<detail::LeakyReluOp<T>>(arch_.leaky_slope));
  }

  params_.assign(offset, T(0));
  running_.assign(stats_offset, T(0));
  for (const auto& [off, n] : unit_var) std::fill_n(running_.begin() + static_cast<std::ptrdiff_t>(off), n, T(1));
  std::mt19937_64 rng(seed);
  for (const auto& init : uniform_inits) {
    std::uniform_real_distribution<double> dist(-init.bound, init.bound);
    for (std::size_t k = 0; k < init.size; ++k) params_[init.offset + k] = static_cast<T>(dist(rng));
  }
  for (const auto& [off, n] : ones) std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(off), n, T(1));
}

template <class T>
void Autoencoder<T>::check_batch(const Matrix<T>& batch) const {
  if (batch.cols() == 0) throw Error(Errc::DimMismatch, "empty batch");
  if (static_cast<std::size_t>(batch.rows()) != input_size_) {
    throw Error(Errc::DimMismatch, "batch rows " + std::to_string(batch.rows()) + " != model input " +
                                       std::to_string(input_size_));
  }
}

template <class T>
ForwardPass<T> Autoencoder<T>::run_forward(const Matrix<T>& batch, Mode mode, std::span<T> running_out,
                                           bool keep_cache, bool encoder_only) const {
  check_batch(batch);
  ForwardPass<T> pass;
  const std::size_t n_ops = encoder_only ? encoder_ops_ : ops_.size();
  if (keep_cache) {
    pass.inputs.resize(n_ops);
    pass.caches.resize(n_ops);
  }
  Matrix<T> cur = batch;
  for (std::size_t i = 0; i < n_ops; ++i) {
    Matrix<T> next;
    ops_[i]->forward(params_, running_, running_out, mode, cur, next, keep_cache ? &pass.caches[i] : nullptr);
    if (keep_cache) pass.inputs[i] = std::move(cur);
    cur = std::move(next);
    if (i + 1 == encoder_ops_) pass.latent = cur;
  }
  if (!encoder_only) pass.reconstruction = std::move(cur);
  return pass;
}

template <class T>
ForwardPass<T> Autoencoder<T>::forward(const Matrix<T>& batch, Mode mode) {
  if (mode == Mode::Infer) return infer(batch);
  return run_forward(batch, Mode::Train, running_, true, false);
}

template <class T>
ForwardPass<T> Autoencoder<T>::infer(const Matrix<T>& batch) const {
  return run_forward(batch, Mode::Infer, {}, false, false);
}

template <class T>
Matrix<T> Autoencoder<T>::encode(const Matrix<T>& batch) const {
  return run_forward(batch, Mode::Infer, {}, false, true).latent;
}

template <class T>
AlignedVector<T> Autoencoder<T>::backward(const ForwardPass<T>& pass, const Matrix<T>& d_reconstruction,
                                        const Matrix<T>& d_latent) const {
  if (pass.caches.size() != ops_.size()) {
    throw Error(Errc::InvalidConfig, "backward needs the cache of a train-mode forward");
  }
  if (d_reconstruction.rows() != pass.reconstruction.rows() || d_reconstruction.cols() != pass.reconstruction.cols() ||
      d_latent.rows() != pass.latent.rows() || d_latent.cols() != pass.latent.cols()) {
    throw Error(Errc::DimMismatch, "loss gradients do not match the forward pass");
  }
  AlignedVector<T> grads(params_.size(), T(0));
  Matrix<T> d = d_reconstruction;
  for (std::size_t i = ops_.size(); i-- > 0;) {
    if (i + 1 == encoder_ops_) d += d_latent;
    Matrix<T> din;
    ops_[i]->backward(params_, pass.inputs[i], pass.caches[i], d, i > 0 ? &din : nullptr, grads);
    d = std::move(din);
  }
  return grads;
}

template class Autoencoder<float>;
template class Autoencoder<double>;
// Extended precision for reference computations such as finite differences.
template class Autoencoder<long double>;

}  // namespace eventcube::sae
