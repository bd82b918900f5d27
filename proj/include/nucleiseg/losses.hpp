#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace nseg {

// Loss hyperparameters. alpha/beta weight the combined objective; gamma is
// the focal exponent; eta_* bound the segmentation-derived imbalance weight.
struct LossConfig {
  double alpha = 1.0;
  double beta = 0.1;
  double gamma = 2.0;
  double eta_cap = 100.0;
  double eta_epsilon = 1.0;     // pixel floor on the predicted-class count
  double seg_threshold = 0.5;   // binarization level for the predicted mask
  double prob_clamp = 1e-7;     // keeps log() finite

  void validate() const {
    if (alpha < 0 || beta < 0) throw std::invalid_argument("loss config: alpha/beta must be >= 0");
    if (gamma < 0) throw std::invalid_argument("loss config: gamma must be >= 0");
    if (eta_cap < 1) throw std::invalid_argument("loss config: eta_cap must be >= 1");
    if (eta_epsilon < 1) throw std::invalid_argument("loss config: eta_epsilon must be >= 1 pixel");
  }
};

// One training step's loss components. total = conf + alpha*loc + beta*seg.
struct LossBreakdown {
  double conf = 0.0;
  double loc = 0.0;
  double seg = 0.0;
  double eta = 1.0;
  double total = 0.0;
  int n_positive = 0;
};

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
struct ScalarWithGrad {
  S value{};
  MatX<S> grad;
};

// L1 segmentation loss: mean |s - s_hat| over all pixels. The gradient with
// respect to the prediction is sign(s_hat - s) / M (0 where they coincide).
template <class S>
ScalarWithGrad<S> seg_loss(const MatX<S>& pred, const MatX<S>& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
    throw std::invalid_argument("seg_loss: shape mismatch");
  const S m = static_cast<S>(pred.size());
  ScalarWithGrad<S> out;
  out.value = (pred - gt).cwiseAbs().sum() / m;
  out.grad = ((pred - gt).array() > S(0)).template cast<S>() -
             ((pred - gt).array() < S(0)).template cast<S>();
  out.grad /= m;
  return out;
}

// Segmentation-derived imbalance weight: sqrt(total pixels / count of
// predicted pixels equal to class c), with a floor on the denominator and a
// cap on the result. Always >= 1 since the count cannot exceed the total.
template <class S>
double imbalance_weight(const MatX<S>& gt, const MatX<S>& pred, int c, const LossConfig& cfg) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
    throw std::invalid_argument("imbalance_weight: shape mismatch");
  const double s_all = static_cast<double>(gt.size());
  const auto fg = (pred.array() >= static_cast<S>(cfg.seg_threshold));
  const double count = c == 1 ? static_cast<double>(fg.count())
                              : static_cast<double>(pred.size()) - static_cast<double>(fg.count());
  const double eta = std::sqrt(s_all / std::max(count, cfg.eta_epsilon));
  return std::min(eta, cfg.eta_cap);
}

// Adapted focal loss on per-anchor target-class probabilities:
// mean over anchors of eta * (1 - c_hat)^gamma * (-log c_hat).
// Probabilities are clamped to [prob_clamp, 1 - prob_clamp] before the log;
// the analytic gradient is with respect to the clamped c_hat.
template <class S>
struct ConfLossResult {
  S value{};
  VecX<S> grad;  // d(value)/d(c_hat), per anchor
};

template <class S>
ConfLossResult<S> conf_loss(const VecX<S>& pred_target_prob, const std::vector<std::int8_t>& targets,
                            double eta, const LossConfig& cfg) {
  if (pred_target_prob.size() == 0) throw std::invalid_argument("conf_loss: empty anchor set");
  if (static_cast<std::size_t>(pred_target_prob.size()) != targets.size())
    throw std::invalid_argument("conf_loss: predictions and targets differ in length");
  const auto n = pred_target_prob.size();
  const S inv_n = S(1) / static_cast<S>(n);
  const S e = static_cast<S>(eta);
  const S g = static_cast<S>(cfg.gamma);
  const S lo = static_cast<S>(cfg.prob_clamp);
  const S hi = S(1) - lo;
  ConfLossResult<S> out;
  out.grad.resize(n);
  S sum = S(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const S c = std::clamp(pred_target_prob[i], lo, hi);
    const S one_minus = S(1) - c;
    const S focal = g == S(0) ? S(1) : std::pow(one_minus, g);
    const S logc = std::log(c);
    sum += e * focal * (-logc);
    // d/dc [ eta (1-c)^g (-log c) ] = eta [ g (1-c)^(g-1) log c - (1-c)^g / c ]
    const S dfocal = g == S(0) ? S(0) : g * std::pow(one_minus, g - S(1));
    out.grad[i] = e * (dfocal * logc - focal / c) * inv_n;
  }
  out.value = sum * inv_n;
  return out;
}

// Smooth L1 (quadratic below |x| = 1, linear above; continuous at the joint).
template <class S>
S smooth_l1(S x) {
  const S a = std::abs(x);
  return a < S(1) ? S(0.5) * x * x : a - S(0.5);
}

template <class S>
S smooth_l1_grad(S x) {
  if (std::abs(x) < S(1)) return x;
  return x > S(0) ? S(1) : S(-1);
}

// Localization loss: mean over positive anchors of the summed smooth-L1 of
// the four offset residuals (target - prediction). Offset matrices are
// per-anchor rows with columns (dx, dy, dw, dh); only rows listed in
// `positives` contribute. Returns 0 with a zero gradient when there are no
// positives (images without nuclei are legal).
template <class S>
ScalarWithGrad<S> loc_loss(const MatX<S>& pred_offsets, const MatX<S>& target_offsets,
                           const std::vector<int>& positives) {
  if (pred_offsets.rows() != target_offsets.rows() || pred_offsets.cols() != 4 ||
      target_offsets.cols() != 4)
    throw std::invalid_argument("loc_loss: offset matrices must be N x 4 with equal N");
  ScalarWithGrad<S> out;
  out.grad = MatX<S>::Zero(pred_offsets.rows(), 4);
  if (positives.empty()) {
    out.value = S(0);
    return out;
  }
  const S inv_n = S(1) / static_cast<S>(positives.size());
  S sum = S(0);
  for (int i : positives) {
    if (i < 0 || i >= pred_offsets.rows()) throw std::out_of_range("loc_loss: positive index out of range");
    for (int p = 0; p < 4; ++p) {
      const S r = target_offsets(i, p) - pred_offsets(i, p);
      sum += smooth_l1(r);
      out.grad(i, p) = -smooth_l1_grad(r) * inv_n;
    }
  }
  out.value = sum * inv_n;
  return out;
}

// Combined objective: conf + alpha * loc + beta * seg.
inline double total_loss(double conf, double loc, double seg, const LossConfig& cfg) {
  return conf + cfg.alpha * loc + cfg.beta * seg;
}

inline LossBreakdown make_breakdown(double conf, double loc, double seg, double eta, int n_positive,
                                    const LossConfig& cfg) {
  LossBreakdown b;
  b.conf = conf;
  b.loc = loc;
  b.seg = seg;
  b.eta = eta;
  b.n_positive = n_positive;
  b.total = total_loss(conf, loc, seg, cfg);
  return b;
}

}  // namespace nseg
