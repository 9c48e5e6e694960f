#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "vicsim/math.hpp"

namespace vicsim {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Small fully connected network, row-per-sample batches, exact reverse-mode
// gradients. Policy nets carry a trainable log_std for the stochastic actor.
class Mlp {
 public:
  enum class Head { Sigmoid, Linear };

  std::vector<int> dims;      // [in, hidden..., out]
  std::vector<MatX> weights;  // layer l: (dims[l+1] x dims[l])
  std::vector<VecX> biases;
  double leaky_slope = 0.01;
  Head head = Head::Sigmoid;
  bool has_log_std = false;
  VecX log_std;

  static Mlp make(std::vector<int> dims, Head head, Rng& rng, bool with_log_std = false,
                  double leaky_slope = 0.01, double log_std_init = std::log(0.2)) {
    if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least input and output dims");
    Mlp net;
    net.dims = std::move(dims);
    net.head = head;
    net.leaky_slope = leaky_slope;
    net.has_log_std = with_log_std;
    for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
      const double bound = 1.0 / std::sqrt(double(net.dims[l]));
      std::uniform_real_distribution<double> u(-bound, bound);
      MatX w(net.dims[l + 1], net.dims[l]);
      for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j) w(i, j) = u(rng);
      net.weights.push_back(std::move(w));
      net.biases.push_back(VecX::Zero(net.dims[l + 1]));
    }
    if (with_log_std) net.log_std = VecX::Constant(net.dims.back(), log_std_init);
    return net;
  }

  int in_dim() const { return dims.front(); }
  int out_dim() const { return dims.back(); }

  int param_count() const {
    int n = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += (dims[l] + 1) * dims[l + 1];
    if (has_log_std) n += dims.back();
    return n;
  }

  struct Cache {
    MatX input;
    std::vector<MatX> pre;  // pre-activations per layer
  };

  // X: (n x in). Returns (n x out); head applied unless apply_head is false,
  // in which case the last linear (pre-squash) output is returned.
  MatX forward(const MatX& X, Cache* cache = nullptr, bool apply_head = true) const {
    if (X.cols() != in_dim()) throw std::invalid_argument("Mlp::forward: dimension mismatch");
    if (cache) {
      cache->input = X;
      cache->pre.clear();
    }
    MatX a = X;
    const std::size_t n_layers = weights.size();
    for (std::size_t l = 0; l < n_layers; ++l) {
      MatX z = (a * weights[l].transpose()).rowwise() + biases[l].transpose();
      if (cache) cache->pre.push_back(z);
      if (l + 1 < n_layers) {
        a = z.unaryExpr([s = leaky_slope](double v) { return v > 0.0 ? v : s * v; });
      } else {
        a = std::move(z);
      }
    }
    if (apply_head && head == Head::Sigmoid)
      a = a.unaryExpr([](double v) { return sigmoid(v); });
    return a;
  }

  VecX forward1(const VecX& z) const {
    MatX x = z.transpose();
    return forward(x).transpose().col(0);
  }

  struct Grads {
    std::vector<MatX> d_weights;
    std::vector<VecX> d_biases;
    VecX d_log_std;

    static Grads zeros_like(const Mlp& net) {
      Grads g;
      for (std::size_t l = 0; l < net.weights.size(); ++l) {
        g.d_weights.push_back(MatX::Zero(net.weights[l].rows(), net.weights[l].cols()));
        g.d_biases.push_back(VecX::Zero(net.biases[l].size()));
      }
      if (net.has_log_std) g.d_log_std = VecX::Zero(net.log_std.size());
      return g;
    }
    void scale(double s) {
      for (auto& w : d_weights) w *= s;
      for (auto& b : d_biases) b *= s;
      if (d_log_std.size()) d_log_std *= s;
    }
    void add(const Grads& o) {
      for (std::size_t l = 0; l < d_weights.size(); ++l) {
        d_weights[l] += o.d_weights[l];
        d_biases[l] += o.d_biases[l];
      }
      if (d_log_std.size() && o.d_log_std.size()) d_log_std += o.d_log_std;
    }
  };

  // upstream: (n x out) gradient of the loss wrt the forward output. If
  // head_applied, upstream is wrt the squashed output and the sigmoid is
  // differentiated here. Accumulates into g.
  void backward(const Cache& cache, const MatX& upstream, bool head_applied, Grads& g) const {
    const std::size_t n_layers = weights.size();
    MatX delta = upstream;
    if (head_applied && head == Head::Sigmoid) {
      const MatX sig = cache.pre.back().unaryExpr([](double v) { return sigmoid(v); });
      delta = delta.cwiseProduct(sig.cwiseProduct(MatX::Ones(sig.rows(), sig.cols()) - sig));
    }
    for (std::size_t li = n_layers; li-- > 0;) {
      const MatX a_prev =
          li == 0 ? cache.input
                  : cache.pre[li - 1].unaryExpr(
                        [s = leaky_slope](double v) { return v > 0.0 ? v : s * v; });
      g.d_weights[li] += delta.transpose() * a_prev;
      g.d_biases[li] += delta.colwise().sum().transpose();
      if (li > 0) {
        delta = (delta * weights[li]).cwiseProduct(cache.pre[li - 1].unaryExpr(
            [s = leaky_slope](double v) { return v > 0.0 ? 1.0 : s; }));
      }
    }
  }

  // Flat parameter vector (weights row-major, then biases, layer by layer, then
  // log_std). Used by the optimizer and gradient checks.
  VecX get_params() const {
    VecX p(param_count());
    int k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      for (int i = 0; i < weights[l].rows(); ++i)
        for (int j = 0; j < weights[l].cols(); ++j) p(k++) = weights[l](i, j);
      for (int i = 0; i < biases[l].size(); ++i) p(k++) = biases[l](i);
    }
    if (has_log_std)
      for (int i = 0; i < log_std.size(); ++i) p(k++) = log_std(i);
    return p;
  }
  void set_params(const VecX& p) {
    if (p.size() != param_count()) throw std::invalid_argument("Mlp::set_params: size mismatch");
    int k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      for (int i = 0; i < weights[l].rows(); ++i)
        for (int j = 0; j < weights[l].cols(); ++j) weights[l](i, j) = p(k++);
      for (int i = 0; i < biases[l].size(); ++i) biases[l](i) = p(k++);
    }
    if (has_log_std)
      for (int i = 0; i < log_std.size(); ++i) log_std(i) = p(k++);
  }
  static VecX flatten_grads(const Mlp& net, const Grads& g) {
    VecX p(net.param_count());
    int k = 0;
    for (std::size_t l = 0; l < g.d_weights.size(); ++l) {
      for (int i = 0; i < g.d_weights[l].rows(); ++i)
        for (int j = 0; j < g.d_weights[l].cols(); ++j) p(k++) = g.d_weights[l](i, j);
      for (int i = 0; i < g.d_biases[l].size(); ++i) p(k++) = g.d_biases[l](i);
    }
    if (net.has_log_std)
      for (int i = 0; i < g.d_log_std.size(); ++i) p(k++) = g.d_log_std(i);
    return p;
  }
};

class Adam {
 public:
  explicit Adam(double lr = 3e-4, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(Mlp& net, const Mlp::Grads& grads) {
    if (m_.size() == 0) {
      m_ = VecX::Zero(net.param_count());
      v_ = VecX::Zero(net.param_count());
    }
    const VecX g = Mlp::flatten_grads(net, grads);
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * g;
    v_ = beta2_ * v_ + (1.0 - beta2_) * g.cwiseProduct(g);
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    VecX p = net.get_params();
    for (int i = 0; i < p.size(); ++i)
      p(i) -= lr_ * (m_(i) / bc1) / (std::sqrt(v_(i) / bc2) + eps_);
    net.set_params(p);
  }

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  VecX m_, v_;
};

// Running mean/variance feature standardization (Welford), frozen for deployment.
class Normalizer {
 public:
  Normalizer() = default;
  explicit Normalizer(int dim)
      : n_(0), mean_(VecX::Zero(dim)), m2_(VecX::Zero(dim)) {}

  void observe(const VecX& x) {
    if (frozen_) return;
    ++n_;
    const VecX delta = x - mean_;
    mean_ += delta / double(n_);
    m2_ += delta.cwiseProduct(x - mean_);
  }
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  VecX stddev() const {
    if (has_std_override_) return std_override_;
    if (n_ < 2) return VecX::Ones(mean_.size());
    return (m2_ / double(n_ - 1)).cwiseSqrt().cwiseMax(1e-6);
  }
  const VecX& mean() const { return mean_; }
  long count() const { return n_; }

  VecX apply(const VecX& x) const {
    if (n_ < 2) return x;
    return (x - mean_).cwiseQuotient(stddev());
  }

  // Restore statistics exactly (bit-for-bit) as serialized.
  void set(const VecX& mean, const VecX& std, long n) {
    mean_ = mean;
    m2_ = std.cwiseProduct(std) * double(std::max(n - 1L, 1L));
    std_override_ = std;
    has_std_override_ = true;
    n_ = n;
    frozen_ = true;
  }

 private:
  long n_ = 0;
  VecX mean_ = VecX::Zero(1);
  VecX m2_ = VecX::Zero(1);
  VecX std_override_;
  bool has_std_override_ = false;
  bool frozen_ = false;
};

}  // namespace vicsim
