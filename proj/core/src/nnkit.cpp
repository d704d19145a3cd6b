#include "udalab/nnkit.hpp"

#include <algorithm>
#include <cmath>

namespace udalab::nnkit {

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1) throw std::invalid_argument("TrainConfig: epochs/batch_size");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate");
  if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("TrainConfig: momentum");
  if (hidden_sizes.empty()) throw std::invalid_argument("TrainConfig: hidden_sizes");
  if (mcd_inner_steps < 1) throw std::invalid_argument("TrainConfig: mcd_inner_steps");
}

double TrainConfig::adv_weight_at(int epoch) const {
  const double half = 0.5 * epochs;
  const double progress = half > 0.0 ? std::min(1.0, epoch / half) : 1.0;
  return adv_weight_start + (adv_weight_end - adv_weight_start) * progress;
}

Mlp Mlp::make(const std::vector<int>& sizes, Activation act, bool activate_output,
              rng::Xoshiro256pp& gen) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp::make: need at least two sizes");
  Mlp net;
  net.activation = act;
  net.activate_output = activate_output;
  net.layers.reserve(sizes.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    LinearLayer layer;
    layer.W.resize(in, out);
    const double limit = std::sqrt(6.0 / (in + out));
    for (int i = 0; i < in; ++i)
      for (int j = 0; j < out; ++j) layer.W(i, j) = gen.uniform(-limit, limit);
    layer.b = Vector::Zero(out);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

MlpGrads MlpGrads::zeros_like(const Mlp& m) {
  MlpGrads g;
  g.W.reserve(m.layers.size());
  g.b.reserve(m.layers.size());
  for (const auto& l : m.layers) {
    g.W.push_back(Matrix::Zero(l.W.rows(), l.W.cols()));
    g.b.push_back(Vector::Zero(l.b.size()));
  }
  return g;
}

void MlpGrads::axpy(double alpha, const MlpGrads& other) {
  for (std::size_t i = 0; i < W.size(); ++i) {
    W[i] += alpha * other.W[i];
    b[i] += alpha * other.b[i];
  }
}

namespace {

Matrix activate(const Matrix& z, Activation act) {
  if (act == Activation::relu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

Matrix activate_grad(const Matrix& z, const Matrix& upstream, Activation act) {
  if (act == Activation::relu)
    return (z.array() > 0.0).cast<double>().matrix().cwiseProduct(upstream);
  const Matrix t = z.array().tanh().matrix();
  return (1.0 - t.array().square()).matrix().cwiseProduct(upstream);
}

}  // namespace

Matrix mlp_forward(const Mlp& net, const Matrix& x, MlpTrace* trace) {
  if (net.layers.empty()) throw std::invalid_argument("mlp_forward: empty net");
  if (x.cols() != net.input_dim()) throw std::invalid_argument("mlp_forward: input width mismatch");
  if (trace) {
    trace->inputs.clear();
    trace->preacts.clear();
  }
  Matrix cur = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Matrix z = cur * net.layers[l].W;
    z.rowwise() += net.layers[l].b.transpose();
    const bool activated = (l + 1 < net.layers.size()) || net.activate_output;
    if (trace) {
      trace->inputs.push_back(std::move(cur));
      trace->preacts.push_back(z);
    }
    cur = activated ? activate(z, net.activation) : std::move(z);
  }
  return cur;
}

MlpGrads mlp_backward(const Mlp& net, const MlpTrace& trace, const Matrix& dout, Matrix* dinput) {
  if (trace.inputs.size() != net.layers.size())
    throw std::invalid_argument("mlp_backward: trace does not match net");
  MlpGrads grads;
  grads.W.resize(net.layers.size());
  grads.b.resize(net.layers.size());
  Matrix g = dout;
  for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
    const bool activated = (l + 1 < static_cast<int>(net.layers.size())) || net.activate_output;
    if (activated) g = activate_grad(trace.preacts[l], g, net.activation);
    grads.W[l] = trace.inputs[l].transpose() * g;
    grads.b[l] = g.colwise().sum().transpose();
    if (l > 0 || dinput) g = g * net.layers[l].W.transpose();
  }
  if (dinput) *dinput = std::move(g);
  return grads;
}

Matrix grl_backward(const Matrix& upstream, double coeff) {
  if (coeff < 0.0) throw std::invalid_argument("grl_backward: coeff must be >= 0");
  return -coeff * upstream;
}

Matrix cdan_condition(const Matrix& features, const Matrix& probs) {
  if (features.rows() != probs.rows())
    throw std::invalid_argument("cdan_condition: batch size mismatch");
  const int d = static_cast<int>(features.cols());
  const int k = static_cast<int>(probs.cols());
  if (d * k > 4096) throw std::invalid_argument("cdan_condition: d*k exceeds 4096");
  for (int i = 0; i < probs.rows(); ++i)
    if (std::abs(probs.row(i).sum() - 1.0) > 1e-6)
      throw std::invalid_argument("cdan_condition: probability rows must sum to 1");
  Matrix out(features.rows(), d * k);
  for (int i = 0; i < features.rows(); ++i)
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < k; ++c) out(i, a * k + c) = features(i, a) * probs(i, c);
  return out;
}

void cdan_condition_backward(const Matrix& features, const Matrix& probs, const Matrix& dout,
                             Matrix& dfeatures, Matrix& dprobs) {
  const int d = static_cast<int>(features.cols());
  const int k = static_cast<int>(probs.cols());
  dfeatures = Matrix::Zero(features.rows(), d);
  dprobs = Matrix::Zero(probs.rows(), k);
  for (int i = 0; i < features.rows(); ++i)
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < k; ++c) {
        dfeatures(i, a) += dout(i, a * k + c) * probs(i, c);
        dprobs(i, c) += dout(i, a * k + c) * features(i, a);
      }
}

double mcd_discrepancy(const Matrix& probs1, const Matrix& probs2) {
  if (probs1.rows() != probs2.rows() || probs1.cols() != probs2.cols())
    throw std::invalid_argument("mcd_discrepancy: shape mismatch");
  return (probs1 - probs2).cwiseAbs().sum() / probs1.rows();
}

Matrix softmax(const Matrix& logits) {
  Matrix p = logits;
  for (int i = 0; i < p.rows(); ++i) {
    Eigen::RowVectorXd row = p.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp();
    p.row(i) = row / row.sum();
  }
  return p;
}

double cross_entropy(const Matrix& logits, const Eigen::VectorXi& labels, Matrix* dlogits) {
  if (logits.rows() != labels.size())
    throw std::invalid_argument("cross_entropy: labels/batch mismatch");
  const Matrix p = softmax(logits);
  const int n = static_cast<int>(logits.rows());
  double loss = 0.0;
  for (int i = 0; i < n; ++i) loss -= std::log(std::max(p(i, labels[i]), 1e-300));
  loss /= n;
  if (dlogits) {
    *dlogits = p;
    for (int i = 0; i < n; ++i) (*dlogits)(i, labels[i]) -= 1.0;
    *dlogits /= n;
  }
  return loss;
}

UdaModel init_model(UdaMethod method, const TrainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  UdaModel m;
  m.method = method;

  std::vector<int> feat_sizes = {2};
  feat_sizes.insert(feat_sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  const int feat_dim = feat_sizes.back();

  rng::Xoshiro256pp g_feat(rng::substream(seed, 0));
  rng::Xoshiro256pp g_cls(rng::substream(seed, 1));
  rng::Xoshiro256pp g_disc(rng::substream(seed, 2));
  rng::Xoshiro256pp g_cls2(rng::substream(seed, 3));

  m.feature = Mlp::make(feat_sizes, Activation::relu, true, g_feat);
  if (method == UdaMethod::Mcd) {
    m.classifier = Mlp::make({feat_dim, 8, 2}, Activation::relu, false, g_cls);
    m.classifier2 = Mlp::make({feat_dim, 8, 2}, Activation::relu, false, g_cls2);
  } else {
    m.classifier = Mlp::make({feat_dim, 2}, Activation::relu, false, g_cls);
  }
  if (method == UdaMethod::Dann)
    m.discriminator = Mlp::make({feat_dim, 8, 2}, Activation::relu, false, g_disc);
  else if (method == UdaMethod::Cdan)
    m.discriminator = Mlp::make({feat_dim * 2, 8, 2}, Activation::relu, false, g_disc);
  return m;
}

namespace {

Eigen::VectorXi domain_labels(int n_source, int n_target) {
  Eigen::VectorXi d(n_source + n_target);
  d.head(n_source).setZero();
  d.tail(n_target).setOnes();
  return d;
}

// Backward through a row-wise softmax: dz_j = p_j (dp_j - sum_k dp_k p_k).
Matrix softmax_backward(const Matrix& probs, const Matrix& dprobs) {
  Matrix dz(probs.rows(), probs.cols());
  for (int i = 0; i < probs.rows(); ++i) {
    const double inner = probs.row(i).dot(dprobs.row(i));
    const Eigen::RowVectorXd centered = (dprobs.row(i).array() - inner).matrix();
    dz.row(i) = probs.row(i).cwiseProduct(centered);
  }
  return dz;
}

struct AdvPass {
  double class_loss = 0.0;
  double domain_loss = 0.0;
  UdaGrads main_grads;  // feature + classifier(s)
  UdaGrads disc_grads;  // discriminator only
};

// Single combined pass for DANN/CDAN. The discriminator descends
// domain_loss; feature (and, for CDAN, classifier through the conditioning)
// descend class_loss - adv_weight * domain_loss, which is what the
// gradient-reversal layer realizes.
AdvPass adversarial_pass(const UdaModel& model, const StepBatch& batch, double adv_weight,
                         bool want_main, bool want_disc) {
  AdvPass out;
  const int ns = static_cast<int>(batch.xs.rows());
  const int nt = static_cast<int>(batch.xt.rows());

  MlpTrace tf_s, tf_t, tc_s, tc_t, td;
  const Matrix fs = mlp_forward(model.feature, batch.xs, &tf_s);
  const Matrix ft = mlp_forward(model.feature, batch.xt, &tf_t);
  const Matrix logits_cs = mlp_forward(model.classifier, fs, &tc_s);

  Matrix dlogits_cs_ce;
  out.class_loss = cross_entropy(logits_cs, batch.ys, &dlogits_cs_ce);

  Matrix disc_in;       // discriminator input for the concatenated batch
  Matrix probs_s, probs_t, logits_ct;
  if (model.method == UdaMethod::Cdan) {
    logits_ct = mlp_forward(model.classifier, ft, &tc_t);
    probs_s = softmax(logits_cs);
    probs_t = softmax(logits_ct);
    disc_in.resize(ns + nt, fs.cols() * probs_s.cols());
    disc_in.topRows(ns) = cdan_condition(fs, probs_s);
    disc_in.bottomRows(nt) = cdan_condition(ft, probs_t);
  } else {
    disc_in.resize(ns + nt, fs.cols());
    disc_in.topRows(ns) = fs;
    disc_in.bottomRows(nt) = ft;
  }

  const Matrix logits_d = mlp_forward(model.discriminator, disc_in, &td);
  Matrix dlogits_d;
  out.domain_loss = cross_entropy(logits_d, domain_labels(ns, nt), &dlogits_d);

  Matrix ddisc_in;
  if (want_main || want_disc) {
    MlpGrads dg = mlp_backward(model.discriminator, td, dlogits_d, want_main ? &ddisc_in : nullptr);
    if (want_disc) out.disc_grads.discriminator = std::move(dg);
  }
  if (!want_main) return out;

  // Reversed adversarial gradients entering everything below the
  // discriminator input.
  const Matrix dadv_in = grl_backward(ddisc_in, adv_weight);

  Matrix dfs = Matrix::Zero(ns, fs.cols());
  Matrix dft = Matrix::Zero(nt, ft.cols());
  Matrix dlogits_cs_total = dlogits_cs_ce;
  Matrix dlogits_ct_total;

  if (model.method == UdaMethod::Cdan) {
    Matrix dfs_cond, dprobs_s, dft_cond, dprobs_t;
    cdan_condition_backward(fs, probs_s, dadv_in.topRows(ns), dfs_cond, dprobs_s);
    cdan_condition_backward(ft, probs_t, dadv_in.bottomRows(nt), dft_cond, dprobs_t);
    dfs += dfs_cond;
    dft += dft_cond;
    dlogits_cs_total += softmax_backward(probs_s, dprobs_s);
    dlogits_ct_total = softmax_backward(probs_t, dprobs_t);
  } else {
    dfs += dadv_in.topRows(ns);
    dft += dadv_in.bottomRows(nt);
  }

  Matrix dfs_from_cls;
  out.main_grads.classifier = mlp_backward(model.classifier, tc_s, dlogits_cs_total, &dfs_from_cls);
  dfs += dfs_from_cls;
  if (model.method == UdaMethod::Cdan) {
    Matrix dft_from_cls;
    MlpGrads cls_t = mlp_backward(model.classifier, tc_t, dlogits_ct_total, &dft_from_cls);
    out.main_grads.classifier.axpy(1.0, cls_t);
    dft += dft_from_cls;
  }

  out.main_grads.feature = mlp_backward(model.feature, tf_s, dfs);
  MlpGrads feat_t = mlp_backward(model.feature, tf_t, dft);
  out.main_grads.feature.axpy(1.0, feat_t);
  return out;
}

struct McdPass {
  double loss = 0.0;
  UdaGrads grads;
};

McdPass mcd_pass(const UdaModel& model, Phase phase, const StepBatch& batch) {
  McdPass out;
  MlpTrace tf_s, tf_t, tc1_s, tc2_s, tc1_t, tc2_t;

  if (phase == Phase::mcd_a) {
    const Matrix fs = mlp_forward(model.feature, batch.xs, &tf_s);
    const Matrix l1 = mlp_forward(model.classifier, fs, &tc1_s);
    const Matrix l2 = mlp_forward(model.classifier2, fs, &tc2_s);
    Matrix d1, d2;
    out.loss = cross_entropy(l1, batch.ys, &d1) + cross_entropy(l2, batch.ys, &d2);
    Matrix dfs1, dfs2;
    out.grads.classifier = mlp_backward(model.classifier, tc1_s, d1, &dfs1);
    out.grads.classifier2 = mlp_backward(model.classifier2, tc2_s, d2, &dfs2);
    out.grads.feature = mlp_backward(model.feature, tf_s, dfs1 + dfs2);
    return out;
  }

  const Matrix ft = mlp_forward(model.feature, batch.xt, &tf_t);
  const Matrix l1t = mlp_forward(model.classifier, ft, &tc1_t);
  const Matrix l2t = mlp_forward(model.classifier2, ft, &tc2_t);
  const Matrix p1 = softmax(l1t);
  const Matrix p2 = softmax(l2t);
  const double disc = mcd_discrepancy(p1, p2);
  const int nt = static_cast<int>(batch.xt.rows());

  // d|p1-p2|/dp1 = sign(p1-p2)/nt
  Matrix dp1 =
      (p1 - p2).unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }) /
      static_cast<double>(nt);
  Matrix dp2 = -dp1;
  Matrix dl1t = softmax_backward(p1, dp1);
  Matrix dl2t = softmax_backward(p2, dp2);

  if (phase == Phase::mcd_b) {
    const Matrix fs = mlp_forward(model.feature, batch.xs, &tf_s);
    const Matrix l1s = mlp_forward(model.classifier, fs, &tc1_s);
    const Matrix l2s = mlp_forward(model.classifier2, fs, &tc2_s);
    Matrix d1s, d2s;
    const double ce = cross_entropy(l1s, batch.ys, &d1s) + cross_entropy(l2s, batch.ys, &d2s);
    out.loss = ce - disc;
    out.grads.classifier = mlp_backward(model.classifier, tc1_s, d1s);
    out.grads.classifier2 = mlp_backward(model.classifier2, tc2_s, d2s);
    MlpGrads c1t = mlp_backward(model.classifier, tc1_t, -dl1t);
    MlpGrads c2t = mlp_backward(model.classifier2, tc2_t, -dl2t);
    out.grads.classifier.axpy(1.0, c1t);
    out.grads.classifier2.axpy(1.0, c2t);
    return out;
  }

  // Phase::mcd_c
  out.loss = disc;
  Matrix dft1, dft2;
  [[maybe_unused]] MlpGrads c1 = mlp_backward(model.classifier, tc1_t, dl1t, &dft1);
  [[maybe_unused]] MlpGrads c2 = mlp_backward(model.classifier2, tc2_t, dl2t, &dft2);
  out.grads.feature = mlp_backward(model.feature, tf_t, dft1 + dft2);
  return out;
}

}  // namespace

double step_loss(const UdaModel& model, Phase phase, const StepBatch& batch, double adv_weight) {
  switch (model.method) {
    case UdaMethod::SourceOnly: {
      if (phase != Phase::main) throw std::invalid_argument("step_loss: SourceOnly has only main");
      const Matrix logits = mlp_forward(model.classifier, mlp_forward(model.feature, batch.xs));
      return cross_entropy(logits, batch.ys);
    }
    case UdaMethod::Dann:
    case UdaMethod::Cdan: {
      const AdvPass pass = adversarial_pass(model, batch, adv_weight, false, false);
      if (phase == Phase::main) return pass.class_loss - adv_weight * pass.domain_loss;
      if (phase == Phase::disc) return pass.domain_loss;
      throw std::invalid_argument("step_loss: invalid phase for adversarial method");
    }
    case UdaMethod::Mcd: {
      if (phase != Phase::mcd_a && phase != Phase::mcd_b && phase != Phase::mcd_c)
        throw std::invalid_argument("step_loss: invalid phase for MCD");
      return mcd_pass(model, phase, batch).loss;
    }
  }
  throw std::logic_error("step_loss: unreachable");
}

UdaGrads step_grads(const UdaModel& model, Phase phase, const StepBatch& batch, double adv_weight) {
  switch (model.method) {
    case UdaMethod::SourceOnly: {
      if (phase != Phase::main) throw std::invalid_argument("step_grads: SourceOnly has only main");
      MlpTrace tf, tc;
      const Matrix fs = mlp_forward(model.feature, batch.xs, &tf);
      const Matrix logits = mlp_forward(model.classifier, fs, &tc);
      Matrix dlogits;
      cross_entropy(logits, batch.ys, &dlogits);
      UdaGrads g;
      Matrix dfs;
      g.classifier = mlp_backward(model.classifier, tc, dlogits, &dfs);
      g.feature = mlp_backward(model.feature, tf, dfs);
      return g;
    }
    case UdaMethod::Dann:
    case UdaMethod::Cdan: {
      if (phase == Phase::main)
        return adversarial_pass(model, batch, adv_weight, true, false).main_grads;
      if (phase == Phase::disc)
        return adversarial_pass(model, batch, adv_weight, false, true).disc_grads;
      throw std::invalid_argument("step_grads: invalid phase for adversarial method");
    }
    case UdaMethod::Mcd:
      return mcd_pass(model, phase, batch).grads;
  }
  throw std::logic_error("step_grads: unreachable");
}

Matrix to_matrix(const datagen::Dataset& d) {
  Matrix x(d.size(), 2);
  for (int i = 0; i < d.size(); ++i) x.row(i) = d.samples[i].x.transpose();
  return x;
}

Eigen::VectorXi to_labels(const datagen::Dataset& d) {
  Eigen::VectorXi y(d.size());
  for (int i = 0; i < d.size(); ++i) y[i] = d.samples[i].y;
  return y;
}

Eigen::VectorXi predict(const UdaModel& model, const Matrix& x) {
  const Matrix logits = mlp_forward(model.classifier, mlp_forward(model.feature, x));
  Eigen::VectorXi out(logits.rows());
  for (int i = 0; i < logits.rows(); ++i) {
    int best = 0;
    for (int k = 1; k < logits.cols(); ++k)
      if (logits(i, k) > logits(i, best)) best = k;
    out[i] = best;
  }
  return out;
}

double evaluate(const UdaModel& model, const datagen::Dataset& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  const Eigen::VectorXi pred = predict(model, to_matrix(data));
  int correct = 0;
  for (int i = 0; i < data.size(); ++i)
    if (pred[i] == data.samples[i].y) ++correct;
  return static_cast<double>(correct) / data.size();
}

namespace {

UdaGrads velocity_like(const UdaModel& m) {
  UdaGrads v;
  v.feature = MlpGrads::zeros_like(m.feature);
  v.classifier = MlpGrads::zeros_like(m.classifier);
  if (!m.discriminator.layers.empty()) v.discriminator = MlpGrads::zeros_like(m.discriminator);
  if (!m.classifier2.layers.empty()) v.classifier2 = MlpGrads::zeros_like(m.classifier2);
  return v;
}

void sgd_update(Mlp& net, MlpGrads& vel, const MlpGrads& g, double lr, double momentum) {
  if (g.W.empty()) return;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    vel.W[l] = momentum * vel.W[l] - lr * g.W[l];
    vel.b[l] = momentum * vel.b[l] - lr * g.b[l];
    net.layers[l].W += vel.W[l];
    net.layers[l].b += vel.b[l];
  }
}

void apply(UdaModel& m, UdaGrads& vel, const UdaGrads& g, double lr, double mu) {
  sgd_update(m.feature, vel.feature, g.feature, lr, mu);
  sgd_update(m.classifier, vel.classifier, g.classifier, lr, mu);
  sgd_update(m.discriminator, vel.discriminator, g.discriminator, lr, mu);
  sgd_update(m.classifier2, vel.classifier2, g.classifier2, lr, mu);
}

void shuffle(std::vector<int>& idx, rng::Xoshiro256pp& gen) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i)
    std::swap(idx[i], idx[gen.below(i + 1)]);
}

}  // namespace

Trainer::Trainer(UdaMethod method, const datagen::Dataset& source, const datagen::Dataset& target,
                 TrainConfig cfg)
    : method_(method),
      cfg_(std::move(cfg)),
      batch_gen_(rng::substream(cfg_.seed, 1)) {
  cfg_.validate();
  if (source.empty() || target.empty())
    throw std::invalid_argument("Trainer: datasets must be non-empty");
  model_ = init_model(method_, cfg_, rng::substream(cfg_.seed, 0));
  velocity_ = velocity_like(model_);
  set_source(source);
  xt_ = to_matrix(target);
  t_idx_.resize(target.size());
  for (int i = 0; i < target.size(); ++i) t_idx_[i] = i;
  shuffle(t_idx_, batch_gen_);
  t_cursor_ = 0;
}

void Trainer::set_source(const datagen::Dataset& source) {
  xs_ = to_matrix(source);
  ys_ = to_labels(source);
  s_idx_.resize(source.size());
  for (int i = 0; i < source.size(); ++i) s_idx_[i] = i;
}

void Trainer::reinitialize(std::uint64_t seed) {
  model_ = init_model(method_, cfg_, seed);
  velocity_ = velocity_like(model_);
  epoch_ = 0;
}

Trainer::EpochResult Trainer::run_epoch() {
  const double adv = cfg_.adv_weight_at(epoch_);
  const int ns = static_cast<int>(xs_.rows());
  const int nt = static_cast<int>(xt_.rows());
  const int steps = (ns + cfg_.batch_size - 1) / cfg_.batch_size;
  shuffle(s_idx_, batch_gen_);

  EpochResult result;
  double adv_loss_sum = 0.0;

  for (int step = 0; step < steps; ++step) {
    const int begin = step * cfg_.batch_size;
    const int bs = std::min(cfg_.batch_size, ns - begin);

    StepBatch batch;
    batch.xs.resize(bs, 2);
    batch.ys.resize(bs);
    for (int i = 0; i < bs; ++i) {
      batch.xs.row(i) = xs_.row(s_idx_[begin + i]);
      batch.ys[i] = ys_[s_idx_[begin + i]];
    }
    batch.xt.resize(bs, 2);
    for (int i = 0; i < bs; ++i) {
      if (t_cursor_ >= nt) {
        shuffle(t_idx_, batch_gen_);
        t_cursor_ = 0;
      }
      batch.xt.row(i) = xt_.row(t_idx_[t_cursor_++]);
    }

    double step_adv = 0.0;
    switch (method_) {
      case UdaMethod::SourceOnly: {
        const UdaGrads g = step_grads(model_, Phase::main, batch, 0.0);
        apply(model_, velocity_, g, cfg_.learning_rate, cfg_.momentum);
        break;
      }
      case UdaMethod::Dann:
      case UdaMethod::Cdan: {
        const AdvPass pass = adversarial_pass(model_, batch, adv, true, true);
        step_adv = pass.domain_loss;
        if (!std::isfinite(pass.class_loss) || !std::isfinite(pass.domain_loss)) {
          result.diverged = true;
          return result;
        }
        UdaGrads g = pass.main_grads;
        g.discriminator = pass.disc_grads.discriminator;
        apply(model_, velocity_, g, cfg_.learning_rate, cfg_.momentum);
        break;
      }
      case UdaMethod::Mcd: {
        apply(model_, velocity_, step_grads(model_, Phase::mcd_a, batch, 0.0), cfg_.learning_rate,
              cfg_.momentum);
        apply(model_, velocity_, step_grads(model_, Phase::mcd_b, batch, 0.0), cfg_.learning_rate,
              cfg_.momentum);
        for (int inner = 0; inner < cfg_.mcd_inner_steps; ++inner) {
          apply(model_, velocity_, step_grads(model_, Phase::mcd_c, batch, 0.0), cfg_.learning_rate,
                cfg_.momentum);
        }
        step_adv = step_loss(model_, Phase::mcd_c, batch, 0.0);
        break;
      }
    }
    if (!std::isfinite(step_adv)) {
      result.diverged = true;
      return result;
    }
    adv_loss_sum += step_adv;
  }

  ++epoch_;
  result.adv_loss = adv_loss_sum / steps;
  return result;
}

TrainReport train_uda(UdaMethod method, const datagen::Dataset& source,
                      const datagen::Dataset& target, const TrainConfig& cfg) {
  Trainer trainer(method, source, target, cfg);
  TrainReport report;
  report.seed = cfg.seed;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Trainer::EpochResult er = trainer.run_epoch();
    if (er.diverged) {
      report.model = trainer.model();
      throw TrainingDiverged(std::move(report));
    }
    report.source_accuracy.push_back(evaluate(trainer.model(), source));
    report.target_accuracy.push_back(evaluate(trainer.model(), target));
    report.adv_loss.push_back(er.adv_loss);
  }
  report.model = trainer.model();
  return report;
}

}  // namespace udalab::nnkit
