#pragma once

#include "lgf/dataset.hpp"
#include "lgf/rng.hpp"
#include "lgf/tensor.hpp"

namespace lgf {

// Gate parameters of the shared unidirectional LSTM. Inputs are scalar per
// timestep (each node feeds its own univariate series), so the input weights
// are F x 1 columns.
struct LstmParams {
    std::size_t hidden = 0;  // F
    Tensor w_input, u_input, b_input;
    Tensor w_forget, u_forget, b_forget;
    Tensor w_output, u_output, b_output;
    Tensor w_cand, u_cand, b_cand;

    static LstmParams init(std::size_t hidden, Rng rng, bool forget_bias_one = true);
};

struct LstmState {
    Tensor h;  // F x 1
    Tensor c;  // F x 1
};

// One recurrence step: gates via sigmoid, candidate via tanh,
// c = f (*) c_prev + i (*) g, h = o (*) tanh(c). Recorded on the tape;
// the parameters are watched in place so their gradients can be read back.
LstmState lstm_step(Tape& tape, LstmParams& params, const Tensor& x_scalar, const LstmState& prev);

// Handles a parameter set already attached to a tape.
struct LstmHandles {
    Tensor w_input, u_input, b_input;
    Tensor w_forget, u_forget, b_forget;
    Tensor w_output, u_output, b_output;
    Tensor w_cand, u_cand, b_cand;
    std::size_t hidden = 0;
};

LstmHandles watch_lstm(Tape& tape, LstmParams& params);
LstmState lstm_step(Tape& tape, const LstmHandles& params, const Tensor& x_scalar, const LstmState& prev);

// Run every variable's segment through the same LSTM (weight sharing) from
// zero initial state; row i of the N x F output is node i's final hidden
// state.
Tensor encode_window(Tape& tape, const LstmHandles& params, const WindowedSample& window);
Tensor encode_window(Tape& tape, LstmParams& params, const WindowedSample& window);

}  // namespace lgf
