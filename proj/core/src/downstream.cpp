#include "ugcl/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "ugcl/rng.hpp"
#include "ugcl/structure_path.hpp"
#include "ugcl/ugcl_trainer.hpp"

namespace ugcl {

void add_gcn_params(nn::ParamStore& store, std::size_t d, std::size_t hidden, std::size_t classes, Rng& rng) {
  store.add(kGcnPrefix + ".Wa", nn::glorot_uniform(d, hidden, rng));
  store.add(kGcnPrefix + ".Wb", nn::glorot_uniform(hidden, classes, rng));
}

nn::Var gcn_forward(nn::ParamBinding& params, const std::shared_ptr<const nn::CsrMatrix>& propagation,
                    nn::Var x, const nn::ForwardMode& mode) {
  nn::Tape& t = params.tape();
  nn::Var h = nn::op::spmm(t, propagation, nn::op::matmul(t, x, params(kGcnPrefix + ".Wa")));
  h = nn::maybe_dropout(t, nn::op::relu(t, h), mode);
  return nn::op::spmm(t, propagation, nn::op::matmul(t, h, params(kGcnPrefix + ".Wb")));
}

nn::DenseMatrix gcn_forward(const nn::CsrMatrix& propagation, const nn::DenseMatrix& x,
                            const nn::ParamStore& params) {
  nn::Tape t;
  nn::ParamBinding bind(t, params);
  auto shared = std::make_shared<const nn::CsrMatrix>(propagation);
  return t.value(gcn_forward(bind, shared, t.constant(x)));
}

nn::CsrMatrix symmetric_propagation(const nn::DenseMatrix& a_sr) {
  if (a_sr.rows() != a_sr.cols()) throw nn::ShapeError("symmetric_propagation: matrix must be square");
  const std::size_t n = a_sr.rows();
  nn::DenseMatrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = std::max(a_sr(i, j), a_sr(j, i));
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (double v : s.row(i)) deg += v;
    inv_sqrt[i] = 1.0 / std::sqrt(deg > 0.0 ? deg : 1.0);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) *= inv_sqrt[i] * inv_sqrt[j];
  return nn::CsrMatrix::from_dense(s);
}

std::vector<int> predict(const nn::DenseMatrix& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double evaluate(const nn::DenseMatrix& logits, const std::vector<int>& labels,
                const std::vector<graph::NodeId>& split) {
  if (split.empty()) throw std::invalid_argument("evaluate: empty split");
  std::size_t correct = 0;
  for (graph::NodeId node : split) {
    const auto row = logits.row(node);
    const auto pred = std::max_element(row.begin(), row.end()) - row.begin();
    if (pred == labels.at(node)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(split.size());
}

LabeledNodes labeled_subset(const graph::GraphDataset& ds, const std::vector<graph::NodeId>& split) {
  LabeledNodes out;
  for (graph::NodeId node : split) {
    if (node >= ds.labels.size() || ds.labels[node] < 0)
      throw std::invalid_argument("labeled_subset: node " + std::to_string(node) + " has no label");
    out.nodes.push_back(node);
    out.labels.push_back(ds.labels[node]);
  }
  return out;
}

void DownstreamConfig::validate() const {
  if (hidden == 0 || attention_dim == 0) throw std::invalid_argument("downstream dimensions must be positive");
  optim.validate();
  if (max_epochs == 0) throw std::invalid_argument("downstream max_epochs must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
}

namespace {

double accuracy_on(const nn::DenseMatrix& logits, const LabeledNodes& subset) {
  std::size_t correct = 0;
  for (std::size_t k = 0; k < subset.nodes.size(); ++k) {
    const auto row = logits.row(subset.nodes[k]);
    if (std::max_element(row.begin(), row.end()) - row.begin() == subset.labels[k]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(subset.nodes.size());
}

}  // namespace

DownstreamResult train_classifier(const DownstreamInput& input, const DownstreamConfig& config,
                                  std::uint64_t seed) {
  config.validate();
  if (input.train.nodes.empty()) throw std::invalid_argument("train_classifier: empty train split");
  if (input.val.nodes.empty()) throw std::invalid_argument("train_classifier: empty validation split");
  if (input.num_classes <= 0) throw std::invalid_argument("train_classifier: no classes");

  const std::size_t d = input.x_fr.cols();
  Rng init_rng = Rng::derive(seed, "downstream.init");
  Rng dropout_rng = Rng::derive(seed, "downstream.dropout");
  nn::ParamStore params;
  add_gcn_params(params, d, config.hidden, static_cast<std::size_t>(input.num_classes), init_rng);
  const bool fuse = input.z_sr.has_value();
  if (fuse) add_fusion_params(params, d, config.attention_dim, init_rng);

  nn::Optimizer optimizer(config.optim);
  const nn::ForwardMode train_mode{config.dropout, &dropout_rng};

  struct Forward {
    nn::Var logits;
    std::optional<FusionVars> fusion;
  };
  auto forward = [&](nn::ParamBinding& bind, const nn::ForwardMode& mode) {
    nn::Tape& t = bind.tape();
    Forward f;
    nn::Var x = t.constant(input.x_fr);
    if (fuse) {
      f.fusion = attention_fuse(bind, x, t.constant(*input.z_sr));
      x = f.fusion->x_hat;
    }
    f.logits = gcn_forward(bind, input.propagation, x, mode);
    return f;
  };

  DownstreamResult result;
  double best_val_loss = std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    {
      nn::Tape t;
      nn::ParamBinding bind(t, params);
      const Forward f = forward(bind, train_mode);
      const nn::Var loss = nn::op::softmax_cross_entropy(t, f.logits, input.train.nodes, input.train.labels);
      const double value = t.scalar(loss);
      if (!std::isfinite(value)) throw std::runtime_error("train_classifier: non-finite loss at epoch " + std::to_string(epoch));
      result.loss_curve.push_back(value);
      t.backward(loss);
      optimizer.step(params);
    }
    result.epochs_run = epoch + 1;

    nn::Tape t;
    nn::ParamBinding bind(t, std::as_const(params));
    const Forward f = forward(bind, {});
    const double val_loss =
        t.scalar(nn::op::softmax_cross_entropy(t, f.logits, input.val.nodes, input.val.labels));
    const nn::DenseMatrix& logits = t.value(f.logits);
    const double val_acc = accuracy_on(logits, input.val);
    if (!have_best || val_acc > result.val_accuracy ||
        (val_acc == result.val_accuracy && val_loss < best_val_loss)) {
      have_best = true;
      result.val_accuracy = val_acc;
      best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.best_logits = logits;
      result.train_accuracy = accuracy_on(logits, input.train);
      if (f.fusion) result.fusion = FusionOut{t.value(f.fusion->x_hat), t.value(f.fusion->weights)};
    } else if (epoch - result.best_epoch >= config.patience) {
      break;
    }
  }
  return result;
}

ScoredRun train_downstream(const graph::GraphDataset& ds, const ReconState& recon, const graph::Splits& splits,
                           const DownstreamConfig& config, std::uint64_t seed) {
  DownstreamInput input;
  input.propagation = std::make_shared<const nn::CsrMatrix>(symmetric_propagation(recon.a_sr));
  input.x_fr = recon.x_fr;
  input.z_sr = recon.z_sr;
  input.train = labeled_subset(ds, splits.train);
  input.val = labeled_subset(ds, splits.val);
  input.num_classes = ds.num_classes;

  ScoredRun run;
  run.result = train_classifier(input, config, seed);
  run.metrics.train_accuracy = run.result.train_accuracy;
  run.metrics.val_accuracy = run.result.val_accuracy;
  run.metrics.test_accuracy = evaluate(run.result.best_logits, ds.labels, splits.test);
  run.metrics.loss_curve = run.result.loss_curve;
  run.metrics.best_epoch = run.result.best_epoch;
  run.metrics.seed = seed;
  return run;
}

ScoredRun train_plain_gcn(const graph::GraphDataset& ds, const graph::Splits& splits,
                          const DownstreamConfig& config, std::uint64_t seed) {
  DownstreamInput input;
  input.propagation = std::make_shared<const nn::CsrMatrix>(normalize_adjacency_sparse(ds.edges, ds.n));
  input.x_fr = ds.features;
  input.train = labeled_subset(ds, splits.train);
  input.val = labeled_subset(ds, splits.val);
  input.num_classes = ds.num_classes;

  ScoredRun run;
  run.result = train_classifier(input, config, seed);
  run.metrics.train_accuracy = run.result.train_accuracy;
  run.metrics.val_accuracy = run.result.val_accuracy;
  run.metrics.test_accuracy = evaluate(run.result.best_logits, ds.labels, splits.test);
  run.metrics.loss_curve = run.result.loss_curve;
  run.metrics.best_epoch = run.result.best_epoch;
  run.metrics.seed = seed;
  return run;
}

}  // namespace ugcl
