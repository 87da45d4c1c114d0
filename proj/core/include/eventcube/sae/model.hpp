#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "eventcube/sae/arch.hpp"

namespace eventcube::sae {

/// Column-major batch: one column per sample.
template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
/// Flat storage with SIMD alignment. Eigen's vectorized loops peel by
/// address, so a fixed base alignment keeps results bit-reproducible.
template <class T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

enum class Mode { Train, Infer };

enum class ParamRole { Weight, Bias, BnScale, BnShift };

struct ParamGroup {
  std::string name;
  ParamRole role;
  bool encoder;
  std::size_t layer;  // index into the op list
  std::size_t offset;
  std::size_t size;
};

/// Batch-norm intermediates kept by a train-mode forward.
template <class T>
struct LayerCache {
  Matrix<T> normalized;  // x-hat
  Vector<T> inv_std;
};

template <class T>
struct ForwardPass {
  Matrix<T> latent;
  Matrix<T> reconstruction;
  // Filled by train-mode forward only: the input of every op and its cache.
  std::vector<Matrix<T>> inputs;
  std::vector<LayerCache<T>> caches;
};

namespace detail {
template <class T>
class Op;
}

/// Mirror-decoder sparse autoencoder. Parameters live in one contiguous
/// vector (weights then bias per layer, batch-norm scale then shift) in
/// declaration order: encoder layers first, then decoder layers. Running
/// batch-norm statistics live in a second vector (mean then variance per
/// batch-norm layer).
template <class T>
class Autoencoder {
 public:
  /// Fan-in scaled uniform weights, zero biases, unit BN scale, running
  /// stats (0, 1). Throws ShapeInferenceFailure.
  Autoencoder(const ArchSpec& arch, std::uint64_t seed);

  const ArchSpec& arch() const noexcept { return arch_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t input_size() const noexcept { return input_size_; }
  std::uint32_t latent_size() const noexcept { return arch_.bottleneck_dim(); }

  std::span<T> parameters() noexcept { return params_; }
  std::span<const T> parameters() const noexcept { return params_; }
  std::span<T> running_stats() noexcept { return running_; }
  std::span<const T> running_stats() const noexcept { return running_; }
  const std::vector<ParamGroup>& parameter_groups() const noexcept { return groups_; }

  /// Train mode normalizes with batch statistics and updates the running
  /// statistics; infer mode uses the running statistics and is read-only.
  ForwardPass<T> forward(const Matrix<T>& batch, Mode mode);
  ForwardPass<T> infer(const Matrix<T>& batch) const;

  /// Encoder only, infer mode.
  Matrix<T> encode(const Matrix<T>& batch) const;

  /// Gradient of the loss with respect to every parameter, given the
  /// loss gradients at the reconstruction and at the latent code.
  AlignedVector<T> backward(const ForwardPass<T>& pass, const Matrix<T>& d_reconstruction,
                          const Matrix<T>& d_latent) const;

  /// Same architecture, parameters converted to another scalar type.
  template <class U>
  Autoencoder<U> cast() const {
    Autoencoder<U> out(arch_, seed_);
    for (std::size_t i = 0; i < params_.size(); ++i) out.parameters()[i] = static_cast<U>(params_[i]);
    for (std::size_t i = 0; i < running_.size(); ++i) out.running_stats()[i] = static_cast<U>(running_[i]);
    return out;
  }

 private:
  void check_batch(const Matrix<T>& batch) const;
  ForwardPass<T> run_forward(const Matrix<T>& batch, Mode mode, std::span<T> running_out, bool keep_cache,
                             bool encoder_only) const;

  ArchSpec arch_;
  std::uint64_t seed_ = 0;
  std::size_t input_size_ = 0;
  std::vector<std::shared_ptr<const detail::Op<T>>> ops_;
  std::size_t encoder_ops_ = 0;  // ops [0, encoder_ops_) form the encoder
  std::vector<ParamGroup> groups_;
  AlignedVector<T> params_;
  AlignedVector<T> running_;
};

using SaeModel = Autoencoder<float>;

struct LossValue {
  double total = 0.0;
  double recon = 0.0;  // batch mean of the per-sample sum of squared errors
  double l1 = 0.0;     // batch mean of the per-sample L1 norm of the code
};

/// total = mean_i ||x_i - xhat_i||^2 + lambda * mean_i ||z_i||_1.
template <class T>
LossValue loss(const Matrix<T>& x, const Matrix<T>& xhat, const Matrix<T>& z, double lambda);

template <class T>
struct LossGradients {
  Matrix<T> d_reconstruction;
  Matrix<T> d_latent;  // lambda * sign(z) / batch, sign(0) = 0
};

template <class T>
LossGradients<T> loss_gradients(const Matrix<T>& x, const Matrix<T>& xhat, const Matrix<T>& z, double lambda);

template <class T>
struct AdamState {
  AlignedVector<T> m;
  AlignedVector<T> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(std::size_t n = 0) : m(n, T(0)), v(n, T(0)) {}
};

/// Bias-corrected Adam update in place.
template <class T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state, double lr);

}  // namespace eventcube::sae
