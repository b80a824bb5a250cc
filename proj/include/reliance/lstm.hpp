#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "reliance/matrix.hpp"

namespace reliance::nn {

// One timestep's inputs for a sequence; spans may point into an embedding
// matrix or into the previous layer's output rows.
using SeqView = std::vector<std::span<const double>>;

// Single-direction LSTM parameters. Gates: i, f, o sigmoid; g tanh;
// c = f*c_prev + i*g; h = o*tanh(c). Forget bias starts at 1.
struct LstmParams {
    Matrix wi, wf, wo, wg;  // hidden x input
    Matrix ui, uf, uo, ug;  // hidden x hidden
    Matrix bi, bf, bo, bg;  // 1 x hidden

    int input_size() const { return wi.cols(); }
    int hidden_size() const { return wi.rows(); }

    static LstmParams create(int input_size, int hidden_size, std::uint64_t seed);
    std::vector<Matrix*> parameters();
    std::vector<const Matrix*> parameters() const;
};

struct LstmGrads {
    LstmParams g;  // same shapes, used as gradient accumulators
    static LstmGrads like(const LstmParams& p);
    void zero();
};

// Cached activations for one sequence pass (rows indexed by timestep).
struct LstmTrace {
    Matrix i, f, o, g, c, h, tanh_c;
    void resize(int steps, int hidden);
};

// One step of the recurrence; caches gate activations for the backward pass.
struct LstmCellResult {
    std::vector<double> h, c;
    std::vector<double> gate_i, gate_f, gate_o, gate_g;
};
LstmCellResult lstm_cell(std::span<const double> x, std::span<const double> h_prev,
                         std::span<const double> c_prev, const LstmParams& params);

// Full-sequence forward; trace rows t hold the step-t activations.
void lstm_forward(const LstmParams& params, const SeqView& xs, LstmTrace& trace);

// BPTT. dh_out(t) is the external gradient flowing into h_t. Parameter
// gradients are accumulated into grads; input gradients into dx when given.
void lstm_backward(const LstmParams& params, const SeqView& xs, const LstmTrace& trace,
                   const Matrix& dh_out, LstmGrads& grads, Matrix* dx);

// Bidirectional wrapper: output row t is [h_fwd(t); h_bwd(t)].
struct BiLstmParams {
    LstmParams fwd, bwd;
    static BiLstmParams create(int input_size, int hidden_size, std::uint64_t seed);
    int output_size() const { return 2 * fwd.hidden_size(); }
};

struct BiLstmTrace {
    LstmTrace fwd, bwd;
};

struct BiLstmGrads {
    LstmGrads fwd, bwd;
    static BiLstmGrads like(const BiLstmParams& p);
    void zero();
};

// Throws EmptySequenceError on an empty input sequence.
Matrix bilstm_forward(const BiLstmParams& params, const SeqView& xs, BiLstmTrace& trace);
void bilstm_backward(const BiLstmParams& params, const SeqView& xs, const BiLstmTrace& trace,
                     const Matrix& d_out, BiLstmGrads& grads, Matrix* dx);

}  // namespace reliance::nn
