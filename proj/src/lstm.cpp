#include "lgf/lstm.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace lgf {

namespace {

Tensor xavier(std::size_t r, std::size_t c, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(r + c));
    std::vector<double> v(r * c);
    for (double& x : v) x = rng.uniform(-bound, bound);
    return Tensor::matrix(r, c, std::move(v));
}

}  // namespace

LstmParams LstmParams::init(std::size_t hidden, Rng rng, bool forget_bias_one) {
    LstmParams p;
    p.hidden = hidden;
    Rng wr = rng.derive("lstm.w");
    Rng ur = rng.derive("lstm.u");
    p.w_input = xavier(hidden, 1, wr);
    p.w_forget = xavier(hidden, 1, wr);
    p.w_output = xavier(hidden, 1, wr);
    p.w_cand = xavier(hidden, 1, wr);
    p.u_input = xavier(hidden, hidden, ur);
    p.u_forget = xavier(hidden, hidden, ur);
    p.u_output = xavier(hidden, hidden, ur);
    p.u_cand = xavier(hidden, hidden, ur);
    p.b_input = Tensor::zeros({hidden, 1});
    p.b_forget = Tensor::zeros({hidden, 1});
    if (forget_bias_one) {
        for (double& v : p.b_forget.values) v = 1.0;
    }
    p.b_output = Tensor::zeros({hidden, 1});
    p.b_cand = Tensor::zeros({hidden, 1});
    return p;
}

LstmHandles watch_lstm(Tape& tape, LstmParams& p) {
    tape.watch(p.w_input);
    tape.watch(p.u_input);
    tape.watch(p.b_input);
    tape.watch(p.w_forget);
    tape.watch(p.u_forget);
    tape.watch(p.b_forget);
    tape.watch(p.w_output);
    tape.watch(p.u_output);
    tape.watch(p.b_output);
    tape.watch(p.w_cand);
    tape.watch(p.u_cand);
    tape.watch(p.b_cand);
    return LstmHandles{p.w_input,  p.u_input,  p.b_input, p.w_forget, p.u_forget, p.b_forget, p.w_output,
                       p.u_output, p.b_output, p.w_cand,  p.u_cand,   p.b_cand,   p.hidden};
}

namespace {

// W x + U h + b for one gate; x is scalar-shaped.
Tensor gate_preact(Tape& tape, const Tensor& w, const Tensor& u, const Tensor& b, const Tensor& x, const Tensor& h) {
    return tape.add(tape.add(tape.scale(w, x), tape.matmul(u, h)), b);
}

}  // namespace

LstmState lstm_step(Tape& tape, const LstmHandles& p, const Tensor& x_scalar, const LstmState& prev) {
    if (prev.h.rows() != p.hidden || prev.c.rows() != p.hidden) {
        throw DimensionError("lstm_step: state size does not match hidden size " + std::to_string(p.hidden));
    }
    const Tensor gate_i = tape.sigmoid(gate_preact(tape, p.w_input, p.u_input, p.b_input, x_scalar, prev.h));
    const Tensor gate_f = tape.sigmoid(gate_preact(tape, p.w_forget, p.u_forget, p.b_forget, x_scalar, prev.h));
    const Tensor gate_o = tape.sigmoid(gate_preact(tape, p.w_output, p.u_output, p.b_output, x_scalar, prev.h));
    const Tensor cand = tape.tanh(gate_preact(tape, p.w_cand, p.u_cand, p.b_cand, x_scalar, prev.h));
    LstmState next;
    next.c = tape.add(tape.hadamard(gate_f, prev.c), tape.hadamard(gate_i, cand));
    next.h = tape.hadamard(gate_o, tape.tanh(next.c));
    return next;
}

LstmState lstm_step(Tape& tape, LstmParams& params, const Tensor& x_scalar, const LstmState& prev) {
    LstmHandles h = watch_lstm(tape, params);
    return lstm_step(tape, h, x_scalar, prev);
}

Tensor encode_window(Tape& tape, const LstmHandles& p, const WindowedSample& window) {
    const std::size_t n = window.variable_count;
    const std::size_t w = window.window_length;
    std::vector<Tensor> final_h;
    final_h.reserve(n);
    for (std::size_t node = 0; node < n; ++node) {
        LstmState state{tape.constant(Tensor::zeros({p.hidden, 1})), tape.constant(Tensor::zeros({p.hidden, 1}))};
        for (std::size_t s = 0; s < w; ++s) {
            const Tensor x = tape.constant_scalar(window.at(s, node));
            state = lstm_step(tape, p, x, state);
        }
        final_h.push_back(state.h);
    }
    // Columns F x 1 -> F x N -> transpose to N x F.
    const Tensor stacked = n == 1 ? final_h[0] : tape.concat_cols(final_h);
    return tape.transpose(stacked);
}

Tensor encode_window(Tape& tape, LstmParams& params, const WindowedSample& window) {
    LstmHandles h = watch_lstm(tape, params);
    return encode_window(tape, h, window);
}

}  // namespace lgf
