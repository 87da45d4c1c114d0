#include <algorithm>
#include <cmath>

#include "eventcube/error.hpp"
#include "eventcube/sae/model.hpp"

namespace eventcube::sae {

template <class T>
LossValue loss(const Matrix<T>& x, const Matrix<T>& xhat, const Matrix<T>& z, double lambda) {
  if (x.rows() != xhat.rows() || x.cols() != xhat.cols() || z.cols() != x.cols()) {
    throw Error(Errc::DimMismatch, "loss operands disagree in shape");
  }
  LossValue out;
  const auto batch = static_cast<double>(x.cols());
  if (batch == 0) return out;
  double sq = 0.0;
  double l1 = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    sq += static_cast<double>((x.col(j) - xhat.col(j)).squaredNorm());
    l1 += static_cast<double>(z.col(j).template lpNorm<1>());
  }
  out.recon = sq / batch;
  out.l1 = l1 / batch;
  out.total = out.recon + lambda * out.l1;
  return out;
}

template <class T>
LossGradients<T> loss_gradients(const Matrix<T>& x, const Matrix<T>& xhat, const Matrix<T>& z, double lambda) {
  if (x.rows() != xhat.rows() || x.cols() != xhat.cols() || z.cols() != x.cols()) {
    throw Error(Errc::DimMismatch, "loss operands disagree in shape");
  }
  const T inv_batch = T(1) / static_cast<T>(x.cols());
  LossGradients<T> g;
  g.d_reconstruction = (xhat - x) * (T(2) * inv_batch);
  const T scale = static_cast<T>(lambda) * inv_batch;
  g.d_latent = z.unaryExpr([scale](T v) { return v > T(0) ? scale : (v < T(0) ? -scale : T(0)); });
  return g;
}

template <class T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state, double lr) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw Error(Errc::DimMismatch, "Adam state does not match the parameter count");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(state.beta1);
  const T b2 = static_cast<T>(state.beta2);
  const T c1 = static_cast<T>(1.0 / (1.0 - std::pow(state.beta1, t)));
  const T c2 = static_cast<T>(1.0 / (1.0 - std::pow(state.beta2, t)));
  const T step = static_cast<T>(lr);
  const T eps = static_cast<T>(state.epsilon);

  using Arr = Eigen::Array<T, Eigen::Dynamic, 1>;
  const auto n = static_cast<Eigen::Index>(params.size());
  Eigen::Map<Arr> p(params.data(), n);
  Eigen::Map<const Arr> g(grads.data(), n);
  Eigen::Map<Arr> m(state.m.data(), n);
  Eigen::Map<Arr> v(state.v.data(), n);
  m = b1 * m + (T(1) - b1) * g;
  v = b2 * v + (T(1) - b2) * g.square();
  p -= step * (m * c1) / ((v * c2).sqrt() + eps);
}

template LossValue loss<float>(const Matrix<float>&, const Matrix<float>&, const Matrix<float>&, double);
template LossValue loss<double>(const Matrix<double>&, const Matrix<double>&, const Matrix<double>&, double);
template LossGradients<float> loss_gradients<float>(const Matrix<float>&, const Matrix<float>&,
                                                    const Matrix<float>&, double);
template LossGradients<double> loss_gradients<double>(const Matrix<double>&, const Matrix<double>&,
                                                      const Matrix<double>&, double);
template void adam_step<float>(std::span<float>, std::span<const float>, AdamState<float>&, double);
template void adam_step<double>(std::span<double>, std::span<const double>, AdamState<double>&, double);

}  // namespace eventcube::sae
