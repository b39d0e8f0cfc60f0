#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qdec/rng.hpp"
#include "qdec/tensor.hpp"

namespace qdec {

struct LstmState {
  Vec hidden;
  Vec cell;

  bool operator==(const LstmState&) const = default;
};

LstmState zero_state(std::size_t hidden_dim);

// Single-layer LSTM without peepholes. Gate rows are fused into 4H-tall
// tensors in the order: input, forget, candidate, output.
struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Mat w_x;   // [4H x input_dim]
  Mat w_h;   // [4H x H]
  Vec bias;  // [4H]

  static LstmParams init(std::size_t input_dim, std::size_t hidden_dim, double init_halfwidth,
                         Rng& rng);
  static LstmParams zeros(std::size_t input_dim, std::size_t hidden_dim);

  bool operator==(const LstmParams&) const = default;
};

// Everything the backward pass needs from one forward step.
struct LstmStepTrace {
  Vec input;
  LstmState prev;
  Vec gate_i, gate_f, gate_g, gate_o;  // post-activation
  Vec cell;
  Vec tanh_cell;
};

struct LstmTrace {
  std::vector<LstmStepTrace> steps;
};

// x must have input_dim entries and prev must match hidden_dim.
LstmState lstm_cell_forward(const LstmParams& params, std::span<const double> x,
                            const LstmState& prev, LstmStepTrace* trace = nullptr);

// Chains the cell left-to-right from `init`; inputs must be non-empty.
std::vector<LstmState> lstm_sequence_forward(const LstmParams& params,
                                             const std::vector<Vec>& inputs,
                                             const LstmState& init,
                                             LstmTrace* trace = nullptr);

struct LstmBackwardResult {
  LstmParams grads;           // same shapes as the parameters
  std::vector<Vec> d_inputs;  // dL/dx_t per step
  LstmState d_init;           // dL/d(init hidden, init cell)
};

// Reverse-mode through a recorded sequence. d_hidden[t] is dL/dh_t from
// downstream consumers of each step's hidden output; d_cell_final, when
// given, adds dL/dc_T at the last step.
LstmBackwardResult lstm_backward(const LstmParams& params, const LstmTrace& trace,
                                 const std::vector<Vec>& d_hidden,
                                 const Vec* d_cell_final = nullptr);

}  // namespace qdec
