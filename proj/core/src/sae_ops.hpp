#pragma once

#include <cmath>
#include <span>

#include <Eigen/Core>

#include "eventcube/sae/model.hpp"

namespace eventcube::sae::detail {

template <class T>
using ConstMap = Eigen::Map<const Matrix<T>>;
template <class T>
using MutMap = Eigen::Map<Matrix<T>>;
template <class T>
using ConstVecMap = Eigen::Map<const Vector<T>>;
template <class T>
using MutVecMap = Eigen::Map<Vector<T>>;

/// One stage of the network. Ops hold offsets into the model's parameter
/// and running-statistic vectors and no state of their own.
template <class T>
class Op {
 public:
  virtual ~Op() = default;

  /// `stats_out` is non-empty only for a train-mode forward that should
  /// update running statistics.
  virtual void forward(std::span<const T> params, std::span<const T> stats, std::span<T> stats_out, Mode mode,
                       const Matrix<T>& in, Matrix<T>& out, LayerCache<T>* cache) const = 0;

  /// Accumulates parameter gradients into `grads`; writes the input
  /// gradient when `din` is non-null.
  virtual void backward(std::span<const T> params, const Matrix<T>& in, const LayerCache<T>& cache,
                        const Matrix<T>& dout, Matrix<T>* din, std::span<T> grads) const = 0;
};

template <class T>
class DenseOp final : public Op<T> {
 public:
  DenseOp(std::size_t in, std::size_t out, std::size_t w_off, std::size_t b_off)
      : in_(in), out_(out), w_off_(w_off), b_off_(b_off) {}

  void forward(std::span<const T> params, std::span<const T>, std::span<T>, Mode, const Matrix<T>& in,
               Matrix<T>& out, LayerCache<T>*) const override {
    ConstMap<T> W(params.data() + w_off_, out_, in_);
    ConstVecMap<T> b(params.data() + b_off_, out_);
    out.noalias() = W * in;
    out.colwise() += b;
  }

  void backward(std::span<const T> params, const Matrix<T>& in, const LayerCache<T>&, const Matrix<T>& dout,
                Matrix<T>* din, std::span<T> grads) const override {
    MutMap<T> dW(grads.data() + w_off_, out_, in_);
    MutVecMap<T> db(grads.data() + b_off_, out_);
    dW.noalias() += dout * in.transpose();
    db += dout.rowwise().sum();
    if (din) {
      ConstMap<T> W(params.data() + w_off_, out_, in_);
      din->noalias() = W.transpose() * dout;
    }
  }

 private:
  std::size_t in_, out_, w_off_, b_off_;
};

/// Patch geometry shared by convolution and its transpose. `image` is the
/// (c, h, w) side, `grid` the (oh, ow) patch positions.
struct PatchGeometry {
  std::size_t c, h, w;
  std::size_t oh, ow;
  std::size_t kh, kw, stride;
  std::ptrdiff_t pad_t, pad_l;

  std::size_t positions() const noexcept { return oh * ow; }
  std::size_t patch() const noexcept { return c * kh * kw; }
  std::size_t image_size() const noexcept { return c * h * w; }
};

/// col(p, q): p = oy * ow + ox, q = (ci * kh + ky) * kw + kx.
template <class T>
void im2col(const PatchGeometry& g, const T* image, Matrix<T>& col) {
  const std::size_t P = g.positions();
  col.resize(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(g.patch()));
  T* out = col.data();
  for (std::size_t ci = 0; ci < g.c; ++ci) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx, out += P) {
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - g.pad_t;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - g.pad_l;
            const bool inside = iy >= 0 && iy < static_cast<std::ptrdiff_t>(g.h) && ix >= 0 &&
                                ix < static_cast<std::ptrdiff_t>(g.w);
            out[oy * g.ow + ox] = inside ? image[(ci * g.h + static_cast<std::size_t>(iy)) * g.w +
                                                 static_cast<std::size_t>(ix)]
                                         : T(0);
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: scatters-and-adds patches back onto the image.
template <class T>
void col2im(const PatchGeometry& g, const Matrix<T>& col, T* image) {
  const std::size_t P = g.positions();
  std::fill(image, image + g.image_size(), T(0));
  const T* in = col.data();
  for (std::size_t ci = 0; ci < g.c; ++ci) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx, in += P) {
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - g.pad_t;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - g.pad_l;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
            image[(ci * g.h + static_cast<std::size_t>(iy)) * g.w + static_cast<std::size_t>(ix)] +=
                in[oy * g.ow + ox];
          }
        }
      }
    }
  }
}

/// Convolution from the image side (c, h, w) to `filters` channels on the
/// patch grid. Weights are (filters x patch).
template <class T>
class Conv2dOp final : public Op<T> {
 public:
  Conv2dOp(PatchGeometry g, std::size_t filters, std::size_t w_off, std::size_t b_off)
      : g_(g), f_(filters), w_off_(w_off), b_off_(b_off) {}

  void forward(std::span<const T> params, std::span<const T>, std::span<T>, Mode, const Matrix<T>& in,
               Matrix<T>& out, LayerCache<T>*) const override {
    ConstMap<T> W(params.data() + w_off_, f_, g_.patch());
    ConstVecMap<T> b(params.data() + b_off_, f_);
    const auto P = static_cast<Eigen::Index>(g_.positions());
    out.resize(static_cast<Eigen::Index>(P * f_), in.cols());
    Matrix<T> col;
    for (Eigen::Index s = 0; s < in.cols(); ++s) {
      im2col(g_, in.col(s).data(), col);
      MutMap<T> y(out.col(s).data(), P, static_cast<Eigen::Index>(f_));
      y.noalias() = col * W.transpose();
      y.rowwise() += b.transpose();
    }
  }

  void backward(std::span<const T> params, const Matrix<T>& in, const LayerCache<T>&, const Matrix<T>& dout,
                Matrix<T>* din, std::span<T> grads) const override {
    ConstMap<T> W(params.data() + w_off_, f_, g_.patch());
    MutMap<T> dW(grads.data() + w_off_, f_, g_.patch());
    MutVecMap<T> db(grads.data() + b_off_, f_);
    const auto P = static_cast<Eigen::Index>(g_.positions());
    if (din) din->resize(in.rows(), in.cols());
    Matrix<T> col;
    Matrix<T> dcol;
    for (Eigen::Index s = 0; s < in.cols(); ++s) {
      im2col(g_, in.col(s).data(), col);
      ConstMap<T> dy(dout.col(s).data(), P, static_cast<Eigen::Index>(f_));
      dW.noalias() += dy.transpose() * col;
      db += dy.colwise().sum().transpose();
      if (din) {
        dcol.noalias() = dy * W;
        col2im(g_, dcol, din->col(s).data());
      }
    }
  }

 private:
  PatchGeometry g_;
  std::size_t f_, w_off_, b_off_;
};

/// Transposed convolution: the adjoint of Conv2dOp with the same geometry,
/// mapping `filters` channels on the patch grid back to the image side.
/// Bias is per image channel.
template <class T>
class ConvTranspose2dOp final : public Op<T> {
 public:
  ConvTranspose2dOp(PatchGeometry g, std::size_t filters, std::size_t w_off, std::size_t b_off)
      : g_(g), f_(filters), w_off_(w_off), b_off_(b_off) {}

  void forward(std::span<const T> params, std::span<const T>, std::span<T>, Mode, const Matrix<T>& in,
               Matrix<T>& out, LayerCache<T>*) const override {
    ConstMap<T> W(params.data() + w_off_, f_, g_.patch());
    const T* b = params.data() + b_off_;
    const auto P = static_cast<Eigen::Index>(g_.positions());
    const std::size_t hw = g_.h * g_.w;
    out.resize(static_cast<Eigen::Index>(g_.image_size()), in.cols());
    Matrix<T> col;
    for (Eigen::Index s = 0; s < in.cols(); ++s) {
      ConstMap<T> x(in.col(s).data(), P, static_cast<Eigen::Index>(f_));
      col.noalias() = x * W;
      T* img = out.col(s).data();
      col2im(g_, col, img);
      for (std::size_t ci = 0; ci < g_.c; ++ci) {
        for (std::size_t p = 0; p < hw; ++p) img[ci * hw + p] += b[ci];
      }
    }
  }

  void backward(std::span<const T> params, const Matrix<T>& in, const LayerCache<T>&, const Matrix<T>& dout,
                Matrix<T>* din, std::span<T> grads) const override {
    ConstMap<T> W(params.data() + w_off_, f_, g_.patch());
    MutMap<T> dW(grads.data() + w_off_, f_, g_.patch());
    T* db = grads.data() + b_off_;
    const auto P = static_cast<Eigen::Index>(g_.positions());
    const std::size_t hw = g_.h * g_.w;
    if (din) din->resize(in.rows(), in.cols());
    Matrix<T> dcol;
    for (Eigen::Index s = 0; s < in.cols(); ++s) {
      const T* dimg = dout.col(s).data();
      for (std::size_t ci = 0; ci < g_.c; ++ci) {
        T acc(0);
        for (std::size_t p = 0; p < hw; ++p) acc += dimg[ci * hw + p];
        db[ci] += acc;
      }
      im2col(g_, dimg, dcol);
      ConstMap<T> x(in.col(s).data(), P, static_cast<Eigen::Index>(f_));
      dW.noalias() += x.transpose() * dcol;
      if (din) {
        MutMap<T> dx(din->col(s).data(), P, static_cast<Eigen::Index>(f_));
        dx.noalias() = dcol * W.transpose();
      }
    }
  }

 private:
  PatchGeometry g_;
  std::size_t f_, w_off_, b_off_;
};

/// Batch normalization over `channels` blocks of `spatial` consecutive rows.
template <class T>
class BatchNormOp final : public Op<T> {
 public:
  BatchNormOp(std::size_t channels, std::size_t spatial, std::size_t gamma_off, std::size_t beta_off,
              std::size_t stats_off, double momentum, double epsilon)
      : c_(channels),
        s_(spatial),
        gamma_off_(gamma_off),
        beta_off_(beta_off),
        stats_off_(stats_off),
        momentum_(momentum),
        epsilon_(epsilon) {}

  void forward(std::span<const T> params, std::span<const T> stats, std::span<T> stats_out, Mode mode,
               const Matrix<T>& in, Matrix<T>& out, LayerCache<T>* cache) const override {
    ConstVecMap<T> gamma(params.data() + gamma_off_, c_);
    ConstVecMap<T> beta(params.data() + beta_off_, c_);
    const auto C = static_cast<Eigen::Index>(c_);
    Vector<T> mean(C);
    Vector<T> inv_std(C);
    if (mode == Mode::Train) {
      Vector<T> var(C);
      channel_moments(in, mean, var);
      inv_std = (var.array() + T(epsilon_)).rsqrt().matrix();
      if (!stats_out.empty()) {
        MutVecMap<T> rmean(stats_out.data() + stats_off_, C);
        MutVecMap<T> rvar(stats_out.data() + stats_off_ + c_, C);
        rmean = T(momentum_) * rmean + T(1.0 - momentum_) * mean;
        rvar = T(momentum_) * rvar + T(1.0 - momentum_) * var;
      }
    } else {
      mean = ConstVecMap<T>(stats.data() + stats_off_, C);
      inv_std = (ConstVecMap<T>(stats.data() + stats_off_ + c_, C).array() + T(epsilon_)).rsqrt().matrix();
    }

    Matrix<T> xhat(in.rows(), in.cols());
    if (s_ == 1) {
      xhat = (in.colwise() - mean).array().colwise() * inv_std.array();
      out = (xhat.array().colwise() * gamma.array()).colwise() + beta.array();
    } else {
      out.resize(in.rows(), in.cols());
      const auto S = static_cast<Eigen::Index>(s_);
      for (Eigen::Index ch = 0; ch < C; ++ch) {
        xhat.middleRows(ch * S, S) = (in.middleRows(ch * S, S).array() - mean(ch)) * inv_std(ch);
        out.middleRows(ch * S, S) = xhat.middleRows(ch * S, S).array() * gamma(ch) + beta(ch);
      }
    }
    if (cache) {
      cache->normalized = std::move(xhat);
      cache->inv_std = std::move(inv_std);
    }
  }

  void backward(std::span<const T> params, const Matrix<T>&, const LayerCache<T>& cache, const Matrix<T>& dout,
                Matrix<T>* din, std::span<T> grads) const override {
    ConstVecMap<T> gamma(params.data() + gamma_off_, c_);
    MutVecMap<T> dgamma(grads.data() + gamma_off_, c_);
    MutVecMap<T> dbeta(grads.data() + beta_off_, c_);
    const Matrix<T>& xhat = cache.normalized;
    const auto C = static_cast<Eigen::Index>(c_);
    const T m = static_cast<T>(static_cast<double>(dout.cols()) * static_cast<double>(s_));

    if (s_ == 1) {
      const Vector<T> sum_dy = dout.rowwise().sum();
      const Vector<T> sum_dy_xhat = dout.cwiseProduct(xhat).rowwise().sum();
      dgamma += sum_dy_xhat;
      dbeta += sum_dy;
      if (din) {
        const Vector<T> scale = (gamma.array() * cache.inv_std.array() / m).matrix();
        *din = ((dout * m).colwise() - sum_dy - (xhat.array().colwise() * sum_dy_xhat.array()).matrix())
                   .array()
                   .colwise() *
               scale.array();
      }
      return;
    }

    const auto S = static_cast<Eigen::Index>(s_);
    if (din) din->resize(dout.rows(), dout.cols());
    for (Eigen::Index ch = 0; ch < C; ++ch) {
      const auto dy = dout.middleRows(ch * S, S);
      const auto xh = xhat.middleRows(ch * S, S);
      const T sum_dy = dy.sum();
      const T sum_dy_xhat = dy.cwiseProduct(xh).sum();
      dgamma(ch) += sum_dy_xhat;
      dbeta(ch) += sum_dy;
      if (din) {
        const T scale = gamma(ch) * cache.inv_std(ch) / m;
        din->middleRows(ch * S, S) = ((dy.array() * m - sum_dy) - xh.array() * sum_dy_xhat) * scale;
      }
    }
  }

 private:
  void channel_moments(const Matrix<T>& in, Vector<T>& mean, Vector<T>& var) const {
    if (s_ == 1) {
      mean = in.rowwise().mean();
      var = (in.colwise() - mean).array().square().rowwise().mean().matrix();
      return;
    }
    const auto S = static_cast<Eigen::Index>(s_);
    const T m = static_cast<T>(static_cast<double>(in.cols()) * static_cast<double>(s_));
    for (Eigen::Index ch = 0; ch < mean.size(); ++ch) {
      const auto block = in.middleRows(ch * S, S);
      mean(ch) = block.sum() / m;
      var(ch) = (block.array() - mean(ch)).square().sum() / m;
    }
  }

  std::size_t c_, s_, gamma_off_, beta_off_, stats_off_;
  double momentum_, epsilon_;
};

template <class T>
class LeakyReluOp final : public Op<T> {
 public:
  explicit LeakyReluOp(double slope) : slope_(static_cast<T>(slope)) {}

  void forward(std::span<const T>, std::span<const T>, std::span<T>, Mode, const Matrix<T>& in, Matrix<T>& out,
               LayerCache<T>*) const override {
    const T a = slope_;
    out = in.unaryExpr([a](T x) { return x > T(0) ? x : a * x; });
  }

  void backward(std::span<const T>, const Matrix<T>& in, const LayerCache<T>&, const Matrix<T>& dout,
                Matrix<T>* din, std::span<T>) const override {
    if (!din) return;
    const T a = slope_;
    *din = dout.binaryExpr(in, [a](T dy, T x) { return x > T(0) ? dy : a * dy; });
  }

 private:
  T slope_;
};

}  // namespace eventcube::sae::detail
