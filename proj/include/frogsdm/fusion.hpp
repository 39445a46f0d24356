#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "frogsdm/balance.hpp"
#include "frogsdm/metrics.hpp"
#include "frogsdm/occurrence.hpp"
#include "frogsdm/raster.hpp"
#include "frogsdm/rng.hpp"

namespace frogsdm {

// --- Losses -------------------------------------------------------------

inline double bce_loss(const std::vector<double>& y, const std::vector<double>& p) {
  if (y.empty() || y.size() != p.size()) throw std::invalid_argument("bce_loss: bad input sizes");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double pc = std::clamp(p[i], 1e-12, 1.0 - 1e-12);
    total += y[i] * std::log(pc) + (1.0 - y[i]) * std::log(1.0 - pc);
  }
  return -total / static_cast<double>(y.size());
}

inline double msle_loss(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.empty() || y.size() != yhat.size())
    throw std::invalid_argument("msle_loss: bad input sizes");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0.0 || yhat[i] < 0.0) throw std::invalid_argument("msle_loss: negative input");
    const double d = std::log1p(y[i]) - std::log1p(yhat[i]);
    total += d * d;
  }
  return total / static_cast<double>(y.size());
}

inline double l2_norm_squared(const std::vector<double>& params) {
  double s = 0.0;
  for (double p : params) s += p * p;
  return s;
}

// weight * base_loss + l2_lambda * ||params||^2
inline double total_loss(double base_loss, double weight, double l2_lambda,
                         const std::vector<double>& params) {
  return weight * base_loss + l2_lambda * l2_norm_squared(params);
}

// --- Model --------------------------------------------------------------

struct ConvLayerSpec {
  int channels = 8;
  int kernel = 3;
};

struct FusionConfig {
  int image_height = 16;
  int image_width = 16;
  int image_bands = 1;
  std::vector<ConvLayerSpec> conv_layers = {{8, 3}, {16, 3}};
  int image_features = 16;              // F_img: dense layer after the conv stack
  std::vector<int> tabular_layers = {16};  // dense stack; last entry is F_tab
  int n_covariates = 10;
  Task task = Task::Classification;
  double l2_lambda = 0.0;
  std::uint64_t seed = 0;
};

// Image branch: [conv (valid, stride 1) -> ReLU -> 2x2 max-pool]* -> flatten
// -> dense -> ReLU. Tabular branch: dense stack with ReLU. Head: dense on the
// concatenation, sigmoid (classification) or ReLU (regression).
struct FusionModel {
  FusionConfig cfg;
  std::vector<double> params;

  struct ConvShape {
    int in_c, in_h, in_w;
    int out_c, k;
    int conv_h, conv_w;  // after valid convolution
    int pool_h, pool_w;  // after 2x2 max-pool (dims < 2 pass through)
    std::size_t w_off, b_off;
  };
  struct DenseShape {
    int in, out;
    std::size_t w_off, b_off;
  };

  std::vector<ConvShape> conv;
  int flat_dim = 0;
  DenseShape image_dense;
  std::vector<DenseShape> tabular;
  DenseShape head;
};

namespace detail {

inline int pooled_dim(int d) { return d >= 2 ? d / 2 : d; }

}  // namespace detail

inline FusionModel build_fusion_model(const FusionConfig& cfg) {
  if (cfg.image_height < 1 || cfg.image_width < 1 || cfg.image_bands < 1)
    throw std::invalid_argument("fusion: image dims and bands must be positive");
  if (cfg.image_features < 1) throw std::invalid_argument("fusion: image_features must be >= 1");
  if (cfg.tabular_layers.empty() || cfg.n_covariates < 1)
    throw std::invalid_argument("fusion: tabular branch needs covariates and at least one layer");

  FusionModel m;
  m.cfg = cfg;
  std::size_t off = 0;
  int c = cfg.image_bands, h = cfg.image_height, w = cfg.image_width;
  for (std::size_t i = 0; i < cfg.conv_layers.size(); ++i) {
    const auto& spec = cfg.conv_layers[i];
    if (spec.channels < 1 || spec.kernel < 1)
      throw std::invalid_argument("fusion: conv layer " + std::to_string(i + 1) +
                                  " has non-positive channels or kernel");
    if (h < spec.kernel || w < spec.kernel)
      throw std::invalid_argument("fusion: conv layer " + std::to_string(i + 1) + " kernel " +
                                  std::to_string(spec.kernel) + " exceeds input " +
                                  std::to_string(h) + "x" + std::to_string(w));
    FusionModel::ConvShape s;
    s.in_c = c;
    s.in_h = h;
    s.in_w = w;
    s.out_c = spec.channels;
    s.k = spec.kernel;
    s.conv_h = h - spec.kernel + 1;
    s.conv_w = w - spec.kernel + 1;
    s.pool_h = detail::pooled_dim(s.conv_h);
    s.pool_w = detail::pooled_dim(s.conv_w);
    s.w_off = off;
    off += static_cast<std::size_t>(s.out_c) * s.in_c * s.k * s.k;
    s.b_off = off;
    off += s.out_c;
    m.conv.push_back(s);
    c = s.out_c;
    h = s.pool_h;
    w = s.pool_w;
  }
  m.flat_dim = c * h * w;

  auto dense = [&off](int in, int out) {
    FusionModel::DenseShape d{in, out, off, 0};
    off += static_cast<std::size_t>(in) * out;
    d.b_off = off;
    off += out;
    return d;
  };
  m.image_dense = dense(m.flat_dim, cfg.image_features);
  int t_in = cfg.n_covariates;
  for (int size : cfg.tabular_layers) {
    if (size < 1) throw std::invalid_argument("fusion: tabular layer size must be >= 1");
    m.tabular.push_back(dense(t_in, size));
    t_in = size;
  }
  m.head = dense(cfg.image_features + t_in, 1);

  m.params.assign(off, 0.0);
  Rng rng(cfg.seed);
  auto init = [&](std::size_t w_off, std::size_t count, int fan_in, int fan_out) {
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < count; ++i) m.params[w_off + i] = rng.uniform(-s, s);
  };
  for (const auto& s : m.conv)
    init(s.w_off, static_cast<std::size_t>(s.out_c) * s.in_c * s.k * s.k, s.in_c * s.k * s.k,
         s.out_c * s.k * s.k);
  init(m.image_dense.w_off, static_cast<std::size_t>(m.image_dense.in) * m.image_dense.out,
       m.image_dense.in, m.image_dense.out);
  for (const auto& d : m.tabular)
    init(d.w_off, static_cast<std::size_t>(d.in) * d.out, d.in, d.out);
  init(m.head.w_off, static_cast<std::size_t>(m.head.in) * m.head.out, m.head.in, m.head.out);
  // The regression head is a single ReLU unit; with a zero bias an unlucky
  // weight draw can leave it below the hinge for every sample, and no gradient
  // ever flows. Start it at 1 in log1p space (count ~ e-1), inside the target
  // range for any non-empty cell.
  if (cfg.task == Task::Regression) m.params[m.head.b_off] = 1.0;
  return m;
}

struct FusionSample {
  std::vector<double> image;       // band-major pixels, bands * h * w
  std::vector<double> covariates;  // length n_covariates
  double target = 0.0;             // {0,1} label or raw count
  double weight = 1.0;
  Country country = Country::AU;
};

inline std::vector<double> patch_to_input(const RasterPatch& patch, const FusionConfig& cfg) {
  if (static_cast<int>(patch.bands.size()) != cfg.image_bands)
    throw std::invalid_argument("fusion input: expected " + std::to_string(cfg.image_bands) +
                                " bands, got " + std::to_string(patch.bands.size()));
  if (patch.height != cfg.image_height || patch.width != cfg.image_width)
    throw std::invalid_argument("fusion input: expected " + std::to_string(cfg.image_height) +
                                "x" + std::to_string(cfg.image_width) + " patch, got " +
                                std::to_string(patch.height) + "x" + std::to_string(patch.width));
  std::vector<double> out;
  out.reserve(patch.bands.size() * patch.bands[0].pixels.size());
  for (const Band& b : patch.bands) {
    const double scale = is_landcover_band(b.name) ? 1.0 / (kLandcoverClasses - 1) : 1.0;
    for (float v : b.pixels) out.push_back(v * scale);
  }
  return out;
}

struct ForwardCache {
  std::vector<std::vector<double>> conv_in;   // input tensor per conv layer
  std::vector<std::vector<double>> conv_pre;  // pre-ReLU conv output
  std::vector<std::vector<double>> pool_out;
  std::vector<std::vector<int>> pool_argmax;  // index into the conv output
  std::vector<double> img_pre, img_out;
  std::vector<std::vector<double>> tab_pre, tab_out;
  std::vector<double> concat;
  double head_pre = 0.0;
  double output = 0.0;
};

namespace detail {

inline void dense_forward(const std::vector<double>& params, const FusionModel::DenseShape& d,
                          const std::vector<double>& in, std::vector<double>& pre) {
  pre.assign(d.out, 0.0);
  for (int o = 0; o < d.out; ++o) {
    double acc = params[d.b_off + o];
    const std::size_t row = d.w_off + static_cast<std::size_t>(o) * d.in;
    for (int i = 0; i < d.in; ++i) acc += params[row + i] * in[i];
    pre[o] = acc;
  }
}

}  // namespace detail

inline double fusion_forward(const FusionModel& m, const FusionSample& sample,
                             ForwardCache* cache = nullptr) {
  if (static_cast<int>(sample.image.size()) !=
      m.cfg.image_bands * m.cfg.image_height * m.cfg.image_width)
    throw std::invalid_argument("fusion forward: image size mismatch");
  if (static_cast<int>(sample.covariates.size()) != m.cfg.n_covariates)
    throw std::invalid_argument("fusion forward: covariate size mismatch");

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.conv_in.clear();
  c.conv_pre.clear();
  c.pool_out.clear();
  c.pool_argmax.clear();

  std::vector<double> cur = sample.image;
  for (const auto& s : m.conv) {
    c.conv_in.push_back(cur);
    std::vector<double> pre(static_cast<std::size_t>(s.out_c) * s.conv_h * s.conv_w, 0.0);
    for (int o = 0; o < s.out_c; ++o) {
      const std::size_t w_base =
          s.w_off + static_cast<std::size_t>(o) * s.in_c * s.k * s.k;
      for (int y = 0; y < s.conv_h; ++y) {
        for (int x = 0; x < s.conv_w; ++x) {
          double acc = m.params[s.b_off + o];
          for (int ci = 0; ci < s.in_c; ++ci) {
            const std::size_t in_base = static_cast<std::size_t>(ci) * s.in_h * s.in_w;
            const std::size_t wk = w_base + static_cast<std::size_t>(ci) * s.k * s.k;
            for (int ky = 0; ky < s.k; ++ky)
              for (int kx = 0; kx < s.k; ++kx)
                acc += m.params[wk + static_cast<std::size_t>(ky) * s.k + kx] *
                       cur[in_base + static_cast<std::size_t>(y + ky) * s.in_w + (x + kx)];
          }
          pre[(static_cast<std::size_t>(o) * s.conv_h + y) * s.conv_w + x] = acc;
        }
      }
    }
    c.conv_pre.push_back(pre);

    std::vector<double> pooled(static_cast<std::size_t>(s.out_c) * s.pool_h * s.pool_w);
    std::vector<int> argmax(pooled.size());
    for (int o = 0; o < s.out_c; ++o) {
      for (int y = 0; y < s.pool_h; ++y) {
        for (int x = 0; x < s.pool_w; ++x) {
          double best = -1.0;  // ReLU output is >= 0
          int best_idx = -1;
          const int y_end = std::min(2 * y + 1, s.conv_h - 1);
          const int x_end = std::min(2 * x + 1, s.conv_w - 1);
          for (int yy = 2 * y; yy <= y_end; ++yy)
            for (int xx = 2 * x; xx <= x_end; ++xx) {
              const int idx = (o * s.conv_h + yy) * s.conv_w + xx;
              const double v = std::max(0.0, pre[idx]);
              if (v > best) {
                best = v;
                best_idx = idx;
              }
            }
          const int out_idx = (o * s.pool_h + y) * s.pool_w + x;
          pooled[out_idx] = best;
          argmax[out_idx] = best_idx;
        }
      }
    }
    c.pool_out.push_back(pooled);
    c.pool_argmax.push_back(std::move(argmax));
    cur = std::move(pooled);
  }

  detail::dense_forward(m.params, m.image_dense, cur, c.img_pre);
  c.img_out.resize(c.img_pre.size());
  for (std::size_t i = 0; i < c.img_pre.size(); ++i) c.img_out[i] = std::max(0.0, c.img_pre[i]);

  c.tab_pre.clear();
  c.tab_out.clear();
  std::vector<double> t = sample.covariates;
  for (const auto& d : m.tabular) {
    std::vector<double> pre;
    detail::dense_forward(m.params, d, t, pre);
    std::vector<double> out(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i) out[i] = std::max(0.0, pre[i]);
    c.tab_pre.push_back(std::move(pre));
    c.tab_out.push_back(out);
    t = std::move(out);
  }

  c.concat = c.img_out;
  c.concat.insert(c.concat.end(), t.begin(), t.end());
  double z = m.params[m.head.b_off];
  for (int i = 0; i < m.head.in; ++i) z += m.params[m.head.w_off + i] * c.concat[i];
  c.head_pre = z;
  c.output = m.cfg.task == Task::Classification ? 1.0 / (1.0 + std::exp(-z)) : std::max(0.0, z);
  return c.output;
}

namespace detail {

// Accumulates one sample's d(scale * loss)/d(params) given d(loss)/d(head_pre).
inline void fusion_backward(const FusionModel& m, const FusionSample& sample,
                            const ForwardCache& c, double dz, std::vector<double>& grad) {
  std::vector<double> d_concat(m.head.in);
  for (int i = 0; i < m.head.in; ++i) {
    grad[m.head.w_off + i] += dz * c.concat[i];
    d_concat[i] = dz * m.params[m.head.w_off + i];
  }
  grad[m.head.b_off] += dz;

  const int f_img = m.cfg.image_features;
  std::vector<double> d_img(d_concat.begin(), d_concat.begin() + f_img);
  std::vector<double> d_tab(d_concat.begin() + f_img, d_concat.end());

  // Tabular stack, last layer first.
  for (int li = static_cast<int>(m.tabular.size()) - 1; li >= 0; --li) {
    const auto& d = m.tabular[li];
    const std::vector<double>& in =
        li == 0 ? sample.covariates : c.tab_out[static_cast<std::size_t>(li) - 1];
    std::vector<double> d_in(d.in, 0.0);
    for (int o = 0; o < d.out; ++o) {
      const double dp = c.tab_pre[li][o] > 0.0 ? d_tab[o] : 0.0;
      if (dp == 0.0) continue;
      const std::size_t row = d.w_off + static_cast<std::size_t>(o) * d.in;
      for (int i = 0; i < d.in; ++i) {
        grad[row + i] += dp * in[i];
        d_in[i] += dp * m.params[row + i];
      }
      grad[d.b_off + o] += dp;
    }
    d_tab = std::move(d_in);
  }

  // Image dense.
  const std::vector<double>& flat = m.conv.empty() ? sample.image : c.pool_out.back();
  std::vector<double> d_flat(m.image_dense.in, 0.0);
  for (int o = 0; o < m.image_dense.out; ++o) {
    const double dp = c.img_pre[o] > 0.0 ? d_img[o] : 0.0;
    if (dp == 0.0) continue;
    const std::size_t row = m.image_dense.w_off + static_cast<std::size_t>(o) * m.image_dense.in;
    for (int i = 0; i < m.image_dense.in; ++i) {
      grad[row + i] += dp * flat[i];
      d_flat[i] += dp * m.params[row + i];
    }
    grad[m.image_dense.b_off + o] += dp;
  }

  // Conv stack, last layer first.
  std::vector<double> d_pool = std::move(d_flat);
  for (int li = static_cast<int>(m.conv.size()) - 1; li >= 0; --li) {
    const auto& s = m.conv[li];
    std::vector<double> d_pre(static_cast<std::size_t>(s.out_c) * s.conv_h * s.conv_w, 0.0);
    for (std::size_t i = 0; i < d_pool.size(); ++i) {
      const int src = c.pool_argmax[li][i];
      if (c.conv_pre[li][src] > 0.0) d_pre[src] += d_pool[i];
    }
    const std::vector<double>& in = c.conv_in[li];
    std::vector<double> d_in(in.size(), 0.0);
    for (int o = 0; o < s.out_c; ++o) {
      const std::size_t w_base = s.w_off + static_cast<std::size_t>(o) * s.in_c * s.k * s.k;
      for (int y = 0; y < s.conv_h; ++y) {
        for (int x = 0; x < s.conv_w; ++x) {
          const double dp = d_pre[(static_cast<std::size_t>(o) * s.conv_h + y) * s.conv_w + x];
          if (dp == 0.0) continue;
          grad[s.b_off + o] += dp;
          for (int ci = 0; ci < s.in_c; ++ci) {
            const std::size_t in_base = static_cast<std::size_t>(ci) * s.in_h * s.in_w;
            const std::size_t wk = w_base + static_cast<std::size_t>(ci) * s.k * s.k;
            for (int ky = 0; ky < s.k; ++ky)
              for (int kx = 0; kx < s.k; ++kx) {
                const std::size_t in_idx =
                    in_base + static_cast<std::size_t>(y + ky) * s.in_w + (x + kx);
                grad[wk + static_cast<std::size_t>(ky) * s.k + kx] += dp * in[in_idx];
                d_in[in_idx] += dp * m.params[wk + static_cast<std::size_t>(ky) * s.k + kx];
              }
          }
        }
      }
    }
    d_pool = std::move(d_in);
  }
}

}  // namespace detail

// Single-sample loss: classification BCE on the sigmoid output, regression
// squared error in log1p space (MSLE on raw counts).
inline double fusion_sample_loss(const FusionModel& m, const FusionSample& sample,
                                 double output) {
  if (m.cfg.task == Task::Classification) {
    const double p = std::clamp(output, 1e-12, 1.0 - 1e-12);
    return -(sample.target * std::log(p) + (1.0 - sample.target) * std::log(1.0 - p));
  }
  const double t = std::log1p(sample.target);
  const double d = output - t;
  return d * d;
}

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Mean over the batch of weight_i * loss_i, plus l2_lambda * ||params||^2.
inline double fusion_batch_loss(const FusionModel& m, const std::vector<FusionSample>& batch) {
  if (batch.empty()) throw std::invalid_argument("fusion: empty batch");
  double total = 0.0;
  for (const auto& s : batch) total += s.weight * fusion_sample_loss(m, s, fusion_forward(m, s));
  return total / static_cast<double>(batch.size()) +
         m.cfg.l2_lambda * l2_norm_squared(m.params);
}

inline LossAndGrad fusion_batch_gradient(const FusionModel& m,
                                         const std::vector<FusionSample>& batch) {
  if (batch.empty()) throw std::invalid_argument("fusion: empty batch");
  LossAndGrad out;
  out.grad.assign(m.params.size(), 0.0);
  ForwardCache cache;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& s : batch) {
    const double output = fusion_forward(m, s, &cache);
    out.loss += s.weight * fusion_sample_loss(m, s, output) * inv_n;
    double dz;
    if (m.cfg.task == Task::Classification) {
      dz = output - s.target;  // d BCE / d head_pre through the sigmoid
    } else {
      const double diff = output - std::log1p(s.target);
      dz = cache.head_pre > 0.0 ? 2.0 * diff : 0.0;
    }
    detail::fusion_backward(m, s, cache, dz * s.weight * inv_n, out.grad);
  }
  if (m.cfg.l2_lambda > 0.0) {
    out.loss += m.cfg.l2_lambda * l2_norm_squared(m.params);
    for (std::size_t i = 0; i < m.params.size(); ++i)
      out.grad[i] += 2.0 * m.cfg.l2_lambda * m.params[i];
  }
  return out;
}

// --- Training -----------------------------------------------------------

struct TrainConfig {
  double lr_init = 1e-3;
  double lr_target = 1e-2;
  int warmup_steps = 100;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 50;
  int batch_size = 32;
  std::map<Country, double> class_weights;  // empty = unweighted
  std::uint64_t seed = 0;
};

inline void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.lr_init > 0.0) || !(cfg.lr_target > 0.0))
    throw std::invalid_argument("train: learning rates must be positive");
  if (cfg.lr_init > cfg.lr_target)
    throw std::invalid_argument("train: lr_init must not exceed lr_target");
  if (cfg.warmup_steps < 0) throw std::invalid_argument("train: warmup_steps must be >= 0");
  if (cfg.epochs < 1 || cfg.batch_size < 1)
    throw std::invalid_argument("train: epochs and batch_size must be >= 1");
}

// Linear warmup from lr_init to lr_target over warmup_steps, then constant.
inline double lr_at(int step, const TrainConfig& cfg) {
  if (step < 0) throw std::invalid_argument("lr_at: negative step");
  if (cfg.warmup_steps == 0 || step >= cfg.warmup_steps) return cfg.lr_target;
  return cfg.lr_init + (cfg.lr_target - cfg.lr_init) * static_cast<double>(step) /
                           static_cast<double>(cfg.warmup_steps);
}

struct TraceRow {
  int epoch = 0;
  double train_metric = 0.0;
  double test_metric = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  FusionModel model;
  std::vector<TraceRow> trace;
};

// Regression outputs live in log1p space; invert for count predictions.
inline double predict_value(const FusionModel& m, const FusionSample& s) {
  const double out = fusion_forward(m, s);
  return m.cfg.task == Task::Classification ? out : std::expm1(out);
}

namespace detail {

inline double dataset_metric(const FusionModel& m, const std::vector<FusionSample>& samples) {
  std::vector<double> truth, pred;
  truth.reserve(samples.size());
  pred.reserve(samples.size());
  std::vector<int> labels;
  for (const auto& s : samples) {
    if (m.cfg.task == Task::Classification) {
      labels.push_back(s.target > 0.5 ? 1 : 0);
      pred.push_back(fusion_forward(m, s));
    } else {
      truth.push_back(s.target);
      pred.push_back(predict_value(m, s));
    }
  }
  return m.cfg.task == Task::Classification ? accuracy(labels, pred) : mae(truth, pred);
}

}  // namespace detail

inline TrainResult train_fusion(const FusionConfig& model_cfg, const TrainConfig& train_cfg,
                                std::vector<FusionSample> train_set,
                                const std::vector<FusionSample>& test_set) {
  validate_train_config(train_cfg);
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");

  for (auto& s : train_set) {
    auto it = train_cfg.class_weights.find(s.country);
    if (it != train_cfg.class_weights.end()) s.weight *= it->second;
  }

  TrainResult result;
  result.model = build_fusion_model(model_cfg);
  FusionModel& model = result.model;

  std::vector<double> adam_m(model.params.size(), 0.0);
  std::vector<double> adam_v(model.params.size(), 0.0);
  Rng rng(train_cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  int step = 0;
  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int n_batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(train_cfg.batch_size)) {
      std::vector<FusionSample> batch;
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(train_cfg.batch_size));
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);

      const LossAndGrad lg = fusion_batch_gradient(model, batch);
      if (!std::isfinite(lg.loss))
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch + 1) + ", step " + std::to_string(step));
      epoch_loss += lg.loss;
      ++n_batches;

      const double lr = lr_at(step, train_cfg);
      ++step;
      const double bc1 = 1.0 - std::pow(train_cfg.adam_beta1, step);
      const double bc2 = 1.0 - std::pow(train_cfg.adam_beta2, step);
      for (std::size_t i = 0; i < model.params.size(); ++i) {
        adam_m[i] = train_cfg.adam_beta1 * adam_m[i] + (1.0 - train_cfg.adam_beta1) * lg.grad[i];
        adam_v[i] =
            train_cfg.adam_beta2 * adam_v[i] + (1.0 - train_cfg.adam_beta2) * lg.grad[i] * lg.grad[i];
        model.params[i] -=
            lr * (adam_m[i] / bc1) / (std::sqrt(adam_v[i] / bc2) + train_cfg.adam_eps);
      }
    }

    TraceRow row;
    row.epoch = epoch + 1;
    row.loss = epoch_loss / std::max(1, n_batches);
    row.train_metric = detail::dataset_metric(model, train_set);
    row.test_metric = test_set.empty() ? 0.0 : detail::dataset_metric(model, test_set);
    result.trace.push_back(row);
  }
  return result;
}

inline void write_trace_csv(const std::vector<TraceRow>& trace,
                            const std::filesystem::path& path) {
  CsvWriter out(path, {"epoch", "train_metric", "test_metric", "loss"});
  for (const auto& r : trace)
    out.row({std::to_string(r.epoch), fmt_double(r.train_metric), fmt_double(r.test_metric),
             fmt_double(r.loss)});
}

// --- Checkpoint format ---------------------------------------------------
// magic "FSDM" | u32 version | config scalars | u64 param count | f64 params,
// everything little-endian.

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

struct ByteReader {
  const unsigned char* p;
  std::size_t size;
  std::size_t off = 0;

  void need(std::size_t n) const {
    if (off + n > size) throw std::runtime_error("checkpoint: truncated file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[off + i]) << (8 * i);
    off += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[off + i]) << (8 * i);
    off += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace detail

inline constexpr char kCheckpointMagic[4] = {'F', 'S', 'D', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void write_checkpoint(const FusionModel& model, const std::filesystem::path& path) {
  std::string buf;
  buf.append(kCheckpointMagic, 4);
  detail::put_u32(buf, kCheckpointVersion);
  const FusionConfig& c = model.cfg;
  detail::put_u32(buf, static_cast<std::uint32_t>(c.image_height));
  detail::put_u32(buf, static_cast<std::uint32_t>(c.image_width));
  detail::put_u32(buf, static_cast<std::uint32_t>(c.image_bands));
  detail::put_u32(buf, static_cast<std::uint32_t>(c.conv_layers.size()));
  for (const auto& l : c.conv_layers) {
    detail::put_u32(buf, static_cast<std::uint32_t>(l.channels));
    detail::put_u32(buf, static_cast<std::uint32_t>(l.kernel));
  }
  detail::put_u32(buf, static_cast<std::uint32_t>(c.image_features));
  detail::put_u32(buf, static_cast<std::uint32_t>(c.tabular_layers.size()));
  for (int s : c.tabular_layers) detail::put_u32(buf, static_cast<std::uint32_t>(s));
  detail::put_u32(buf, static_cast<std::uint32_t>(c.n_covariates));
  detail::put_u32(buf, c.task == Task::Classification ? 0u : 1u);
  detail::put_f64(buf, c.l2_lambda);
  detail::put_u64(buf, c.seed);
  detail::put_u64(buf, model.params.size());
  for (double p : model.params) detail::put_f64(buf, p);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline FusionModel read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  if (buf.size() < 8 || std::memcmp(buf.data(), kCheckpointMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  detail::ByteReader r{reinterpret_cast<const unsigned char*>(buf.data()), buf.size(), 4};
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  FusionConfig c;
  c.image_height = static_cast<int>(r.u32());
  c.image_width = static_cast<int>(r.u32());
  c.image_bands = static_cast<int>(r.u32());
  c.conv_layers.clear();
  const std::uint32_t n_conv = r.u32();
  for (std::uint32_t i = 0; i < n_conv; ++i) {
    ConvLayerSpec l;
    l.channels = static_cast<int>(r.u32());
    l.kernel = static_cast<int>(r.u32());
    c.conv_layers.push_back(l);
  }
  c.image_features = static_cast<int>(r.u32());
  c.tabular_layers.clear();
  const std::uint32_t n_tab = r.u32();
  for (std::uint32_t i = 0; i < n_tab; ++i) c.tabular_layers.push_back(static_cast<int>(r.u32()));
  c.n_covariates = static_cast<int>(r.u32());
  c.task = r.u32() == 0 ? Task::Classification : Task::Regression;
  c.l2_lambda = r.f64();
  c.seed = r.u64();
  FusionModel model = build_fusion_model(c);
  const std::uint64_t n_params = r.u64();
  if (n_params != model.params.size())
    throw std::runtime_error("checkpoint: parameter count mismatch in " + path.string());
  for (std::size_t i = 0; i < model.params.size(); ++i) model.params[i] = r.f64();
  return model;
}

}  // namespace frogsdm
