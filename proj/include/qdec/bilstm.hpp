#pragma once

#include <vector>

#include "qdec/lstm.hpp"

namespace qdec {

struct BiLstmParams {
  LstmParams forward;
  LstmParams backward;

  static BiLstmParams init(std::size_t input_dim, std::size_t hidden_dim,
                           double init_halfwidth, Rng& rng);
  static BiLstmParams zeros(std::size_t input_dim, std::size_t hidden_dim);

  bool operator==(const BiLstmParams&) const = default;
};

struct BiLstmTrace {
  LstmTrace fwd;
  LstmTrace bwd;  // stored in the backward direction's own time order
};

// output[t] = concat(forward_hidden[t], backward_hidden[t]); the backward
// direction consumes the inputs right-to-left. Output vectors have length
// 2 * hidden_dim.
std::vector<Vec> bilstm_forward(const BiLstmParams& params, const std::vector<Vec>& inputs,
                                const LstmState& init_fwd, const LstmState& init_bwd,
                                BiLstmTrace* trace = nullptr);

struct BiLstmBackwardResult {
  BiLstmParams grads;
  std::vector<Vec> d_inputs;
  LstmState d_init_fwd;
  LstmState d_init_bwd;
};

BiLstmBackwardResult bilstm_backward(const BiLstmParams& params, const BiLstmTrace& trace,
                                     const std::vector<Vec>& d_outputs);

}  // namespace qdec
