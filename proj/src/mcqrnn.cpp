#include "condex/mcqrnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "condex/empirical.hpp"
#include "condex/rng.hpp"

namespace condex {

namespace {

// Flat parameter layout shared by training and the exported layers.
struct Layout {
  struct Block {
    int inputs;
    int outputs;
    std::size_t w_offset;
    std::size_t b_offset;
  };
  std::vector<Block> blocks;
  std::vector<std::uint8_t> constrained;  // per flat parameter
  std::size_t size = 0;
  int width = 0;
};

Layout make_layout(int layers, int nodes) {
  Layout lay;
  lay.width = std::max(2, nodes);
  int in = 2;
  for (int l = 0; l <= layers; ++l) {
    const int out = (l == layers) ? 1 : nodes;
    Layout::Block b{in, out, lay.size, lay.size + static_cast<std::size_t>(in * out)};
    lay.size += static_cast<std::size_t>(in * out + out);
    for (int o = 0; o < out; ++o) {
      for (int i = 0; i < in; ++i) {
        // First layer: only the tau column. Later layers: every weight.
        lay.constrained.push_back(l == 0 ? (i == 1 ? 1 : 0) : 1);
      }
    }
    lay.constrained.insert(lay.constrained.end(), static_cast<std::size_t>(out), 0);
    lay.blocks.push_back(b);
    in = out;
  }
  return lay;
}

inline double fast_tanh(double z) { return 1.0 - 2.0 / (1.0 + std::exp(2.0 * z)); }

class Network {
 public:
  Network(const Layout& layout, std::span<const double> params)
      : lay_(layout), width_(static_cast<std::size_t>(layout.width)) {
    eff_.assign(params.begin(), params.end());
    for (std::size_t i = 0; i < eff_.size(); ++i) {
      if (lay_.constrained[i]) eff_[i] = std::exp(params[i]);
    }
    act_.assign((lay_.blocks.size() + 1) * width_, 0.0);
    delta_.resize(width_);
    delta_prev_.resize(width_);
  }

  double forward(double xs, double tau) {
    double* a = act_.data();
    a[0] = xs;
    a[1] = tau;
    const std::size_t last = lay_.blocks.size() - 1;
    for (std::size_t l = 0; l < lay_.blocks.size(); ++l) {
      const auto& b = lay_.blocks[l];
      const double* in = a + l * width_;
      double* out = a + (l + 1) * width_;
      const double* w = eff_.data() + b.w_offset;
      const double* bias = eff_.data() + b.b_offset;
      for (int o = 0; o < b.outputs; ++o, w += b.inputs) {
        double z = bias[o];
        for (int i = 0; i < b.inputs; ++i) z += w[i] * in[i];
        out[o] = (l == last) ? z : fast_tanh(z);
      }
    }
    return a[lay_.blocks.size() * width_];
  }

  // Accumulates d(loss)/d(effective parameter) for the last forward pass.
  void backward(double dout, std::vector<double>& grad) {
    double* d = delta_.data();
    double* dp = delta_prev_.data();
    d[0] = dout;
    for (std::size_t l = lay_.blocks.size(); l-- > 0;) {
      const auto& b = lay_.blocks[l];
      const double* in = act_.data() + l * width_;
      const double* w = eff_.data() + b.w_offset;
      double* gw = grad.data() + b.w_offset;
      double* gb = grad.data() + b.b_offset;
      for (int i = 0; i < b.inputs; ++i) dp[i] = 0.0;
      for (int o = 0; o < b.outputs; ++o, w += b.inputs, gw += b.inputs) {
        const double g = d[o];
        gb[o] += g;
        for (int i = 0; i < b.inputs; ++i) {
          gw[i] += g * in[i];
          dp[i] += w[i] * g;
        }
      }
      if (l == 0) break;
      for (int i = 0; i < b.inputs; ++i) d[i] = dp[i] * (1.0 - in[i] * in[i]);
    }
  }

  [[nodiscard]] const std::vector<double>& effective() const noexcept { return eff_; }

 private:
  const Layout& lay_;
  std::size_t width_;
  std::vector<double> eff_;
  std::vector<double> act_;
  std::vector<double> delta_;
  std::vector<double> delta_prev_;
};

double smoothed_pinball_slope(double r, double tau, double eps) {
  const double h = std::abs(r) <= eps ? r / eps : (r > 0.0 ? 1.0 : -1.0);
  return (r >= 0.0 ? tau : 1.0 - tau) * h;
}

std::vector<double> initial_params(const Layout& lay, std::uint64_t seed) {
  UniformStream s(seed);
  std::vector<double> p(lay.size);
  for (const auto& b : lay.blocks) {
    const double spread = 1.0 / std::sqrt(static_cast<double>(b.inputs));
    for (int k = 0; k < b.inputs * b.outputs; ++k) {
      const std::size_t i = b.w_offset + static_cast<std::size_t>(k);
      p[i] = lay.constrained[i] ? std::log(spread * (0.2 + 0.8 * s.next())) : spread * (2.0 * s.next() - 1.0);
    }
    for (int k = 0; k < b.outputs; ++k) p[b.b_offset + static_cast<std::size_t>(k)] = 0.5 * (2.0 * s.next() - 1.0);
  }
  return p;
}

std::vector<DenseLayer> export_layers(const Layout& lay, const std::vector<double>& p) {
  std::vector<DenseLayer> out;
  for (const auto& b : lay.blocks) {
    DenseLayer d;
    d.inputs = b.inputs;
    d.outputs = b.outputs;
    const auto w0 = static_cast<std::ptrdiff_t>(b.w_offset);
    const auto b0 = static_cast<std::ptrdiff_t>(b.b_offset);
    d.raw_weights.assign(p.begin() + w0, p.begin() + b0);
    d.constrained.assign(lay.constrained.begin() + w0, lay.constrained.begin() + b0);
    d.biases.assign(p.begin() + b0, p.begin() + b0 + b.outputs);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

double DenseLayer::weight(int out, int in) const {
  const auto k = static_cast<std::size_t>(out * inputs + in);
  return constrained[k] ? std::exp(raw_weights[k]) : raw_weights[k];
}

void McqrnnConfig::validate() const {
  if (hidden_layers < 1 || hidden_nodes < 1) throw std::invalid_argument("mcqrnn: layers and nodes must be >= 1");
  if (taus.empty()) throw std::invalid_argument("mcqrnn: taus must be non-empty");
  for (std::size_t k = 0; k < taus.size(); ++k) {
    if (!(taus[k] > 0.0 && taus[k] < 1.0)) throw std::domain_error("mcqrnn: taus must lie in (0, 1)");
    if (k > 0 && !(taus[k] > taus[k - 1])) throw std::invalid_argument("mcqrnn: taus must be strictly increasing");
  }
  if (epochs < 1 || restarts < 1) throw std::invalid_argument("mcqrnn: epochs and restarts must be >= 1");
  if (!(learning_rate > 0.0) || !(final_lr_fraction > 0.0) || !(smoothing > 0.0)) {
    throw std::invalid_argument("mcqrnn: learning rate, decay and smoothing must be positive");
  }
}

double pinball(double residual, double tau) { return residual * (tau - (residual < 0.0 ? 1.0 : 0.0)); }

double smoothed_pinball(double residual, double tau, double eps) {
  const double a = std::abs(residual);
  const double h = a <= eps ? 0.5 * residual * residual / eps : a - 0.5 * eps;
  return (residual >= 0.0 ? tau : 1.0 - tau) * h;
}

McqrnnModel train_mcqrnn(const PairData& pairs, const McqrnnConfig& config) {
  config.validate();
  const std::size_t n = pairs.size();
  if (pairs.x2.size() != n) throw std::invalid_argument("mcqrnn: x1 and x2 differ in length");
  if (n < 30) throw std::invalid_argument("mcqrnn: need at least 30 pairs, got " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(pairs.x1[i]) || !std::isfinite(pairs.x2[i])) {
      throw std::invalid_argument("mcqrnn: non-finite value at row " + std::to_string(i));
    }
  }

  McqrnnModel model;
  model.config = config;
  model.x_mean = mean(pairs.x1);
  model.x_scale = std::sqrt(variance_pop(pairs.x1));
  if (!(model.x_scale > 0.0)) model.x_scale = 1.0;
  model.y_mean = mean(pairs.x2);
  model.y_scale = std::sqrt(variance_pop(pairs.x2));

  const Layout lay = make_layout(config.hidden_layers, config.hidden_nodes);
  const double spread = *std::max_element(pairs.x2.begin(), pairs.x2.end()) -
                        *std::min_element(pairs.x2.begin(), pairs.x2.end());
  if (!(model.y_scale > 1e-12 * std::max(1.0, std::abs(model.y_mean))) || spread == 0.0) {
    // Zero output weights cannot be expressed through exp, so the constant
    // predictor is flagged and handled at prediction time.
    model.constant = true;
    model.y_scale = 1.0;
    model.layers = export_layers(lay, std::vector<double>(lay.size, 0.0));
    model.warnings.push_back("mcqrnn: response is constant; returning a constant predictor");
    return model;
  }

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = (pairs.x1[i] - model.x_mean) / model.x_scale;
    ys[i] = (pairs.x2[i] - model.y_mean) / model.y_scale;
  }
  const double eps = config.smoothing;
  const auto& taus = config.taus;
  const double rows = static_cast<double>(n * taus.size());
  const double decay = std::pow(config.final_lr_fraction, 1.0 / std::max(1, config.epochs - 1));

  std::vector<double> best_params;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<double> grad(lay.size), m1(lay.size), m2(lay.size);
  for (int restart = 0; restart < config.restarts; ++restart) {
    std::vector<double> p = initial_params(lay, derive_seed(config.seed, 0x6d6371726e6eULL, static_cast<std::uint64_t>(restart)));
    std::fill(m1.begin(), m1.end(), 0.0);
    std::fill(m2.begin(), m2.end(), 0.0);
    std::vector<double> restart_best = p;
    double restart_loss = std::numeric_limits<double>::infinity();
    double lr = config.learning_rate;
    double b1t = 1.0, b2t = 1.0;
    for (int epoch = 0; epoch <= config.epochs; ++epoch) {
      Network net(lay, p);
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (double t : taus) {
          const double r = ys[i] - net.forward(xs[i], t);
          loss += smoothed_pinball(r, t, eps);
          net.backward(-smoothed_pinball_slope(r, t, eps) / rows, grad);
        }
      }
      loss /= rows;
      if (!std::isfinite(loss)) {
        throw TrainingError("mcqrnn: loss diverged at epoch " + std::to_string(epoch) + " of restart " +
                                std::to_string(restart),
                            epoch);
      }
      if (loss < restart_loss) {
        restart_loss = loss;
        restart_best = p;
      }
      if (epoch == config.epochs) break;
      // Chain rule through exp for constrained parameters.
      const auto& eff = net.effective();
      for (std::size_t k = 0; k < lay.size; ++k) {
        if (lay.constrained[k]) grad[k] *= eff[k];
      }
      b1t *= 0.9;
      b2t *= 0.999;
      for (std::size_t k = 0; k < lay.size; ++k) {
        m1[k] = 0.9 * m1[k] + 0.1 * grad[k];
        m2[k] = 0.999 * m2[k] + 0.001 * grad[k] * grad[k];
        const double mh = m1[k] / (1.0 - b1t);
        const double vh = m2[k] / (1.0 - b2t);
        p[k] -= lr * mh / (std::sqrt(vh) + 1e-8);
      }
      lr *= decay;
    }
    model.restart_losses.push_back(restart_loss);
    if (restart_loss < best_loss) {
      best_loss = restart_loss;
      best_params = restart_best;
    }
  }
  model.loss = best_loss;
  model.layers = export_layers(lay, best_params);
  return model;
}

double mcqrnn_predict(const McqrnnModel& model, double x1, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("mcqrnn: tau must lie in (0, 1)");
  if (model.constant) return model.y_mean;
  // Small fixed-size forward pass using the exported layers.
  std::vector<double> a{(x1 - model.x_mean) / model.x_scale, tau}, next;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& d = model.layers[l];
    next.assign(static_cast<std::size_t>(d.outputs), 0.0);
    for (int o = 0; o < d.outputs; ++o) {
      double z = d.biases[static_cast<std::size_t>(o)];
      for (int i = 0; i < d.inputs; ++i) z += d.weight(o, i) * a[static_cast<std::size_t>(i)];
      next[static_cast<std::size_t>(o)] = (l + 1 == model.layers.size()) ? z : fast_tanh(z);
    }
    a.swap(next);
  }
  return model.y_mean + model.y_scale * a[0];
}

double mcqrnn_loss(const McqrnnModel& model, const PairData& pairs) {
  double loss = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double y = (pairs.x2[i] - model.y_mean) / model.y_scale;
    for (double t : model.config.taus) {
      const double f = (mcqrnn_predict(model, pairs.x1[i], t) - model.y_mean) / model.y_scale;
      loss += smoothed_pinball(y - f, t, model.config.smoothing);
    }
  }
  return loss / static_cast<double>(pairs.size() * model.config.taus.size());
}

ConditionalQuantileCurve predict_quantiles(const McqrnnModel& model, std::span<const double> x1_grid,
                                           std::span<const double> taus) {
  ConditionalQuantileCurve c;
  c.x1.assign(x1_grid.begin(), x1_grid.end());
  c.taus.assign(taus.begin(), taus.end());
  c.values.reserve(c.x1.size() * c.taus.size());
  std::vector<std::size_t> order(c.taus.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c.taus[a] < c.taus[b]; });
  for (double x : c.x1) {
    const std::size_t row = c.values.size();
    for (double t : c.taus) c.values.push_back(mcqrnn_predict(model, x, t));
    for (std::size_t k = 1; k < order.size(); ++k) {
      if (c.values[row + order[k]] - c.values[row + order[k - 1]] < -1e-9) {
        throw std::logic_error("mcqrnn: quantile crossing at x1 = " + std::to_string(x));
      }
    }
  }
  return c;
}

}  // namespace condex
