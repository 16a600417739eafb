#include "ugcl/ugcl_trainer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "ugcl/rng.hpp"

namespace ugcl {

void ModelDims::validate() const {
  if (imputer_hidden == 0 || pe_dim == 0 || ppnp_hidden == 0 || gcn_hidden == 0 || attention_dim == 0)
    throw std::invalid_argument("model dimensions must be positive");
}

void UgclConfig::validate() const {
  ppr.validate();
  contrastive.validate();
  dims.validate();
  optim.validate();
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
}

UgclObjective::UgclObjective(const graph::GraphDataset& masked, const PprConfig& ppr, double temperature)
    : features_(masked.features),
      mask_(masked.feature_mask),
      structure_(build_structure_graph(masked.edges, masked.n, ppr)),
      a_sr_unit_rows_(std::make_shared<const nn::CsrMatrix>(unit_rows(*structure_.a_sr_csr))),
      temperature_(temperature) {}

nn::ParamStore UgclObjective::init_params(const ModelDims& dims, Rng& rng) const {
  nn::ParamStore store;
  add_imputer_params(store, features_.cols(), dims.imputer_hidden, rng);
  add_structure_params(store, features_.rows(), dims.pe_dim, dims.ppnp_hidden, features_.cols(), rng);
  return store;
}

UgclObjective::Recorded UgclObjective::record(nn::ParamBinding& params, const nn::ForwardMode& mode) const {
  nn::Tape& t = params.tape();
  Recorded r;
  r.x_fr = impute_features(params, features_, mask_, mode);
  r.a_fr = decode_structure(t, r.x_fr);
  r.x_pe = positional_features(params);
  r.z_sr = ppnp_forward(params, structure_.a_sr_csr, r.x_pe, mode);
  r.loss = total_loss(t, r.x_fr, r.z_sr, r.a_fr, a_sr_unit_rows_, temperature_);
  return r;
}

double UgclObjective::loss(const nn::ParamStore& params) const {
  nn::Tape t;
  nn::ParamBinding bind(t, params);
  return t.scalar(record(bind).loss.total);
}

double UgclObjective::loss_and_grad(nn::ParamStore& params) const {
  nn::Tape t;
  nn::ParamBinding bind(t, params);
  const Recorded r = record(bind);
  t.backward(r.loss.total);
  return t.scalar(r.loss.total);
}

ReconState run_ugcl(const graph::GraphDataset& masked, const UgclConfig& config, std::uint64_t seed) {
  config.validate();
  masked.validate();
  const UgclObjective objective(masked, config.ppr, config.contrastive.temperature);

  Rng init_rng = Rng::derive(seed, "ugcl.init");
  Rng dropout_rng = Rng::derive(seed, "ugcl.dropout");
  ReconState state;
  state.params = objective.init_params(config.dims, init_rng);
  nn::Optimizer optimizer(config.optim);
  const nn::ForwardMode train_mode{config.dropout, &dropout_rng};

  state.history.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    nn::Tape t;
    nn::ParamBinding bind(t, state.params);
    const auto r = objective.record(bind, train_mode);
    const EpochLoss entry{epoch, t.scalar(r.loss.feature), t.scalar(r.loss.structure), t.scalar(r.loss.total)};
    if (!std::isfinite(entry.total))
      throw std::runtime_error("run_ugcl: non-finite loss at epoch " + std::to_string(epoch));
    state.history.push_back(entry);
    t.backward(r.loss.total);
    optimizer.step(state.params);
  }

  nn::Tape t;
  nn::ParamBinding bind(t, std::as_const(state.params));
  const auto r = objective.record(bind);
  state.x_fr = t.value(r.x_fr);
  state.a_fr = t.value(r.a_fr);
  state.x_pe = t.value(r.x_pe);
  state.z_sr = t.value(r.z_sr);
  state.final_loss = {config.epochs, t.scalar(r.loss.feature), t.scalar(r.loss.structure), t.scalar(r.loss.total)};
  if (!std::isfinite(state.final_loss.total))
    throw std::runtime_error("run_ugcl: non-finite loss at epoch " + std::to_string(config.epochs));
  state.a_sr_dense = objective.structure().a_sr_dense;
  state.a_sr = objective.structure().a_sr;
  state.a_sr_csr = objective.structure().a_sr_csr;
  return state;
}

}  // namespace ugcl
