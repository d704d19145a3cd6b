#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "udalab/datagen.hpp"
#include "udalab/rng.hpp"

namespace udalab::nnkit {

using Matrix = Eigen::MatrixXd;  // rows are samples
using Vector = Eigen::VectorXd;

enum class Activation { relu, tanh };

struct LinearLayer {
  Matrix W;  // (in x out)
  Vector b;  // (out)
};

/// Plain fully-connected net. The activation follows every layer except the
/// last unless activate_output is set (feature extractors keep it on so the
/// representation itself is post-activation).
struct Mlp {
  std::vector<LinearLayer> layers;
  Activation activation = Activation::relu;
  bool activate_output = false;

  int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().W.rows()); }
  int output_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().W.cols()); }

  /// Glorot-uniform weights, zero biases, drawn from `gen`.
  static Mlp make(const std::vector<int>& sizes, Activation act, bool activate_output,
                  rng::Xoshiro256pp& gen);
};

/// Per-layer inputs and pre-activations captured by the forward pass; required
/// by mlp_backward.
struct MlpTrace {
  std::vector<Matrix> inputs;
  std::vector<Matrix> preacts;
};

struct MlpGrads {
  std::vector<Matrix> W;
  std::vector<Vector> b;

  static MlpGrads zeros_like(const Mlp& m);
  void axpy(double alpha, const MlpGrads& other);  ///< this += alpha * other
};

/// Forward pass; records the trace when given. Throws on input width mismatch.
Matrix mlp_forward(const Mlp& net, const Matrix& x, MlpTrace* trace = nullptr);

/// Exact gradients of a scalar loss given d(loss)/d(output). Optionally
/// returns d(loss)/d(input) for chaining through composite models.
MlpGrads mlp_backward(const Mlp& net, const MlpTrace& trace, const Matrix& dout,
                      Matrix* dinput = nullptr);

/// Gradient-reversal backward rule: forward is the identity, backward emits
/// -coeff times the upstream gradient.
Matrix grl_backward(const Matrix& upstream, double coeff);

/// Multilinear conditioning: rows of the result are the row-major flattened
/// outer products features_i probs_i^T. Requires rows of `probs` to sum to 1
/// within 1e-6 and d*k <= 4096.
Matrix cdan_condition(const Matrix& features, const Matrix& probs);
/// Backward of cdan_condition with respect to both arguments.
void cdan_condition_backward(const Matrix& features, const Matrix& probs, const Matrix& dout,
                             Matrix& dfeatures, Matrix& dprobs);

/// Mean over the batch of the L1 distance between class-probability rows.
double mcd_discrepancy(const Matrix& probs1, const Matrix& probs2);

enum class UdaMethod { SourceOnly, Dann, Cdan, Mcd };

struct TrainConfig {
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double adv_weight_start = 0.0;  ///< lambda_adv ramps linearly ...
  double adv_weight_end = 1.0;    ///< ... over the first half of training
  std::vector<int> hidden_sizes = {16, 16};
  std::uint64_t seed = 0;
  int mcd_inner_steps = 4;

  void validate() const;
  double adv_weight_at(int epoch) const;
};

struct UdaModel {
  UdaMethod method = UdaMethod::SourceOnly;
  Mlp feature;
  Mlp classifier;
  Mlp discriminator;  ///< DANN/CDAN only
  Mlp classifier2;    ///< MCD only
};

/// Feature extractor 2->hidden sizes (relu, activated output); classifier
/// 16->2 (16->8->2 for MCD, twice); discriminator 16->8->2 for DANN and
/// 32->8->2 for CDAN (conditioned input).
UdaModel init_model(UdaMethod method, const TrainConfig& cfg, std::uint64_t seed);

struct TrainReport {
  UdaModel model;
  std::vector<double> source_accuracy;  ///< per epoch
  std::vector<double> target_accuracy;  ///< per epoch
  std::vector<double> adv_loss;         ///< per epoch
  std::uint64_t seed = 0;
};

/// Thrown when a training loss turns NaN/Inf; carries the partial report.
struct TrainingDiverged : std::runtime_error {
  TrainReport partial;
  explicit TrainingDiverged(TrainReport r)
      : std::runtime_error("training diverged (non-finite loss)"), partial(std::move(r)) {}
};

/// One optimization step's inputs: a labeled source batch and an unlabeled
/// target batch. Target labels are never part of this structure.
struct StepBatch {
  Matrix xs;
  Eigen::VectorXi ys;
  Matrix xt;
};

/// The scalar objective each parameter group descends, exposed for gradient
/// verification. `main` covers feature+classifier(s) (adversarial terms enter
/// with a negative sign, realizing the reversal), `disc` covers the
/// discriminator, and mcd_a/b/c are the three MCD round phases.
enum class Phase { main, disc, mcd_a, mcd_b, mcd_c };

double step_loss(const UdaModel& model, Phase phase, const StepBatch& batch, double adv_weight);

struct UdaGrads {
  MlpGrads feature, classifier, discriminator, classifier2;
};

/// Gradients of step_loss for the parameter groups the phase trains; the
/// remaining groups are left empty.
UdaGrads step_grads(const UdaModel& model, Phase phase, const StepBatch& batch, double adv_weight);

/// Epoch-level trainer with persistent optimizer state, for callers that
/// interleave training with other updates (the clean-label attack). Only the
/// feature matrix of the target set is retained; target labels are unread.
class Trainer {
 public:
  Trainer(UdaMethod method, const datagen::Dataset& source, const datagen::Dataset& target,
          TrainConfig cfg);

  struct EpochResult {
    double adv_loss = 0.0;
    bool diverged = false;
  };

  /// Runs one epoch of mini-batch SGD at the current ramp position.
  EpochResult run_epoch();

  /// Replaces the source set (same semantics, e.g. moved poison points).
  void set_source(const datagen::Dataset& source);

  /// Fresh model and optimizer state from `seed`; the ramp restarts.
  void reinitialize(std::uint64_t seed);

  const UdaModel& model() const { return model_; }
  int epoch() const { return epoch_; }

 private:
  UdaMethod method_;
  TrainConfig cfg_;
  UdaModel model_;
  UdaGrads velocity_;
  rng::Xoshiro256pp batch_gen_;
  Matrix xs_;
  Eigen::VectorXi ys_;
  Matrix xt_;
  std::vector<int> s_idx_, t_idx_;
  int t_cursor_ = 0;
  int epoch_ = 0;
};

/// Mini-batch SGD training of the selected method. Target labels are read
/// only by the per-epoch evaluation, never by the optimization. Deterministic
/// given cfg.seed. Throws TrainingDiverged (with the partial report) when a
/// loss turns non-finite.
TrainReport train_uda(UdaMethod method, const datagen::Dataset& source,
                      const datagen::Dataset& target, const TrainConfig& cfg);

/// Fraction of argmax-correct predictions; ties break to the lowest class
/// index. Throws std::invalid_argument on an empty dataset.
double evaluate(const UdaModel& model, const datagen::Dataset& data);

/// Argmax class predictions for a feature matrix.
Eigen::VectorXi predict(const UdaModel& model, const Matrix& x);

/// Row-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);

/// Mean cross-entropy of logits against labels; optionally emits d(loss)/d(logits).
double cross_entropy(const Matrix& logits, const Eigen::VectorXi& labels, Matrix* dlogits = nullptr);

Matrix to_matrix(const datagen::Dataset& d);
Eigen::VectorXi to_labels(const datagen::Dataset& d);

}  // namespace udalab::nnkit
