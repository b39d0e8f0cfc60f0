#include "qdec/bilstm.hpp"

#include <algorithm>
#include <stdexcept>

namespace qdec {

BiLstmParams BiLstmParams::init(std::size_t input_dim, std::size_t hidden_dim,
                                double init_halfwidth, Rng& rng) {
  BiLstmParams p;
  p.forward = LstmParams::init(input_dim, hidden_dim, init_halfwidth, rng);
  p.backward = LstmParams::init(input_dim, hidden_dim, init_halfwidth, rng);
  return p;
}

BiLstmParams BiLstmParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  BiLstmParams p;
  p.forward = LstmParams::zeros(input_dim, hidden_dim);
  p.backward = LstmParams::zeros(input_dim, hidden_dim);
  return p;
}

std::vector<Vec> bilstm_forward(const BiLstmParams& params, const std::vector<Vec>& inputs,
                                const LstmState& init_fwd, const LstmState& init_bwd,
                                BiLstmTrace* trace) {
  if (inputs.empty()) throw std::invalid_argument("bilstm_forward: empty input sequence");
  if (params.forward.input_dim != params.backward.input_dim ||
      params.forward.hidden_dim != params.backward.hidden_dim)
    throw std::invalid_argument("bilstm_forward: direction dimensions disagree");

  const std::size_t steps = inputs.size();
  const std::size_t h = params.forward.hidden_dim;

  std::vector<LstmState> fwd = lstm_sequence_forward(params.forward, inputs, init_fwd,
                                                     trace ? &trace->fwd : nullptr);

  std::vector<Vec> reversed(inputs.rbegin(), inputs.rend());
  std::vector<LstmState> bwd = lstm_sequence_forward(params.backward, reversed, init_bwd,
                                                     trace ? &trace->bwd : nullptr);

  std::vector<Vec> out(steps, Vec(2 * h));
  for (std::size_t t = 0; t < steps; ++t) {
    std::copy(fwd[t].hidden.begin(), fwd[t].hidden.end(), out[t].begin());
    const Vec& back = bwd[steps - 1 - t].hidden;
    std::copy(back.begin(), back.end(), out[t].begin() + h);
  }
  return out;
}

BiLstmBackwardResult bilstm_backward(const BiLstmParams& params, const BiLstmTrace& trace,
                                     const std::vector<Vec>& d_outputs) {
  const std::size_t steps = trace.fwd.steps.size();
  if (steps == 0) throw std::logic_error("bilstm_backward: no recorded forward pass");
  if (d_outputs.size() != steps)
    throw std::invalid_argument("bilstm_backward: d_outputs length mismatch");
  const std::size_t h = params.forward.hidden_dim;

  std::vector<Vec> d_fwd(steps), d_bwd(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    d_fwd[t].assign(d_outputs[t].begin(), d_outputs[t].begin() + h);
    // position t's backward half was produced at the backward pass's own
    // step (steps - 1 - t)
    d_bwd[steps - 1 - t].assign(d_outputs[t].begin() + h, d_outputs[t].end());
  }

  LstmBackwardResult fwd_res = lstm_backward(params.forward, trace.fwd, d_fwd);
  LstmBackwardResult bwd_res = lstm_backward(params.backward, trace.bwd, d_bwd);

  BiLstmBackwardResult res;
  res.grads.forward = std::move(fwd_res.grads);
  res.grads.backward = std::move(bwd_res.grads);
  res.d_init_fwd = std::move(fwd_res.d_init);
  res.d_init_bwd = std::move(bwd_res.d_init);
  res.d_inputs.assign(steps, Vec(params.forward.input_dim, 0.0));
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t j = 0; j < params.forward.input_dim; ++j) {
      res.d_inputs[t][j] =
          fwd_res.d_inputs[t][j] + bwd_res.d_inputs[steps - 1 - t][j];
    }
  }
  return res;
}

}  // namespace qdec
