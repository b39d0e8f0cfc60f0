#include "qdec/lstm.hpp"

#include <cmath>
#include <stdexcept>

#include "qdec/kernels.hpp"
#include "qdec/ops.hpp"

namespace qdec {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LstmState zero_state(std::size_t hidden_dim) {
  return LstmState{Vec(hidden_dim, 0.0), Vec(hidden_dim, 0.0)};
}

LstmParams LstmParams::init(std::size_t input_dim, std::size_t hidden_dim,
                            double init_halfwidth, Rng& rng) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w_x = init_uniform_mat(4 * hidden_dim, input_dim, init_halfwidth, rng);
  p.w_h = init_uniform_mat(4 * hidden_dim, hidden_dim, init_halfwidth, rng);
  p.bias = init_uniform_vec(4 * hidden_dim, init_halfwidth, rng);
  return p;
}

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w_x = Mat(4 * hidden_dim, input_dim);
  p.w_h = Mat(4 * hidden_dim, hidden_dim);
  p.bias = Vec(4 * hidden_dim, 0.0);
  return p;
}

LstmState lstm_cell_forward(const LstmParams& params, std::span<const double> x,
                            const LstmState& prev, LstmStepTrace* trace) {
  const std::size_t h = params.hidden_dim;
  if (x.size() != params.input_dim)
    throw std::invalid_argument("lstm_cell_forward: input dimension mismatch");
  if (prev.hidden.size() != h || prev.cell.size() != h)
    throw std::invalid_argument("lstm_cell_forward: state dimension mismatch");

  const auto& k = kern::active();
  Vec pre(params.bias);
  k.matvec_add(params.w_x.data(), 4 * h, params.input_dim, x.data(), pre.data());
  k.matvec_add(params.w_h.data(), 4 * h, h, prev.hidden.data(), pre.data());

  Vec gi(h), gf(h), gg(h), go(h);
  LstmState out{Vec(h), Vec(h)};
  Vec tanh_c(h);
  for (std::size_t j = 0; j < h; ++j) {
    gi[j] = sigmoid(pre[j]);
    gf[j] = sigmoid(pre[h + j]);
    gg[j] = std::tanh(pre[2 * h + j]);
    go[j] = sigmoid(pre[3 * h + j]);
    out.cell[j] = gf[j] * prev.cell[j] + gi[j] * gg[j];
    tanh_c[j] = std::tanh(out.cell[j]);
    out.hidden[j] = go[j] * tanh_c[j];
  }

  if (trace) {
    trace->input.assign(x.begin(), x.end());
    trace->prev = prev;
    trace->gate_i = std::move(gi);
    trace->gate_f = std::move(gf);
    trace->gate_g = std::move(gg);
    trace->gate_o = std::move(go);
    trace->cell = out.cell;
    trace->tanh_cell = std::move(tanh_c);
  }
  return out;
}

std::vector<LstmState> lstm_sequence_forward(const LstmParams& params,
                                             const std::vector<Vec>& inputs,
                                             const LstmState& init, LstmTrace* trace) {
  if (inputs.empty())
    throw std::invalid_argument("lstm_sequence_forward: empty input sequence");
  std::vector<LstmState> states;
  states.reserve(inputs.size());
  if (trace) trace->steps.resize(inputs.size());
  const LstmState* prev = &init;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    LstmStepTrace* step = trace ? &trace->steps[t] : nullptr;
    states.push_back(lstm_cell_forward(params, inputs[t], *prev, step));
    prev = &states.back();
  }
  return states;
}

LstmBackwardResult lstm_backward(const LstmParams& params, const LstmTrace& trace,
                                 const std::vector<Vec>& d_hidden, const Vec* d_cell_final) {
  const std::size_t h = params.hidden_dim;
  const std::size_t steps = trace.steps.size();
  if (steps == 0) throw std::logic_error("lstm_backward: no recorded forward pass");
  if (d_hidden.size() != steps)
    throw std::invalid_argument("lstm_backward: d_hidden length mismatch");

  const auto& k = kern::active();
  LstmBackwardResult res;
  res.grads = LstmParams::zeros(params.input_dim, h);
  res.d_inputs.assign(steps, Vec(params.input_dim, 0.0));

  Vec dh_carry(h, 0.0);
  Vec dc_carry(h, 0.0);
  if (d_cell_final) dc_carry = *d_cell_final;

  Vec da(4 * h);
  for (std::size_t t = steps; t-- > 0;) {
    const LstmStepTrace& s = trace.steps[t];

    for (std::size_t j = 0; j < h; ++j) {
      const double dh = d_hidden[t][j] + dh_carry[j];
      const double tc = s.tanh_cell[j];
      const double dout = dh * tc;
      const double dc = dc_carry[j] + dh * s.gate_o[j] * (1.0 - tc * tc);

      const double di = dc * s.gate_g[j];
      const double df = dc * s.prev.cell[j];
      const double dg = dc * s.gate_i[j];
      dc_carry[j] = dc * s.gate_f[j];

      da[j] = di * s.gate_i[j] * (1.0 - s.gate_i[j]);
      da[h + j] = df * s.gate_f[j] * (1.0 - s.gate_f[j]);
      da[2 * h + j] = dg * (1.0 - s.gate_g[j] * s.gate_g[j]);
      da[3 * h + j] = dout * s.gate_o[j] * (1.0 - s.gate_o[j]);
    }

    k.outer_add(res.grads.w_x.data(), 4 * h, params.input_dim, da.data(), s.input.data());
    k.outer_add(res.grads.w_h.data(), 4 * h, h, da.data(), s.prev.hidden.data());
    k.axpy(1.0, da.data(), res.grads.bias.data(), 4 * h);

    k.matvec_t_add(params.w_x.data(), 4 * h, params.input_dim, da.data(),
                   res.d_inputs[t].data());
    std::fill(dh_carry.begin(), dh_carry.end(), 0.0);
    k.matvec_t_add(params.w_h.data(), 4 * h, h, da.data(), dh_carry.data());
  }

  res.d_init.hidden = std::move(dh_carry);
  res.d_init.cell = std::move(dc_carry);
  return res;
}

}  // namespace qdec
