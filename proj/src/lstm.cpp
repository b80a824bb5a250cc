#include "reliance/lstm.hpp"

#include <cmath>

#include "reliance/errors.hpp"
#include "reliance/nn.hpp"
#include "reliance/rng.hpp"

namespace reliance::nn {
namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// pre = W x + U h_prev + b, then the gate nonlinearity
void gate_preact(const Matrix& w, const Matrix& u, const Matrix& b, std::span<const double> x,
                 std::span<const double> h_prev, std::span<double> out) {
    matvec(w, x, out);
    const int hid = u.rows();
    for (int r = 0; r < hid; ++r) {
        const double* ur = u.row(r);
        double s = out[static_cast<std::size_t>(r)] + b.data()[r];
        for (int c = 0; c < hid; ++c) s += ur[c] * h_prev[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = s;
    }
}

}  // namespace

LstmParams LstmParams::create(int input_size, int hidden_size, std::uint64_t seed) {
    LstmParams p;
    Rng seeder(seed);
    auto make_w = [&](Matrix& m) {
        m = Matrix(hidden_size, input_size);
        glorot_init(m, input_size, hidden_size, seeder.next_u64());
    };
    auto make_u = [&](Matrix& m) {
        m = Matrix(hidden_size, hidden_size);
        glorot_init(m, hidden_size, hidden_size, seeder.next_u64());
    };
    make_w(p.wi);
    make_w(p.wf);
    make_w(p.wo);
    make_w(p.wg);
    make_u(p.ui);
    make_u(p.uf);
    make_u(p.uo);
    make_u(p.ug);
    p.bi = Matrix(1, hidden_size);
    p.bf = Matrix(1, hidden_size);
    p.bo = Matrix(1, hidden_size);
    p.bg = Matrix(1, hidden_size);
    p.bf.fill(1.0);
    return p;
}

std::vector<Matrix*> LstmParams::parameters() {
    return {&wi, &wf, &wo, &wg, &ui, &uf, &uo, &ug, &bi, &bf, &bo, &bg};
}

std::vector<const Matrix*> LstmParams::parameters() const {
    return {&wi, &wf, &wo, &wg, &ui, &uf, &uo, &ug, &bi, &bf, &bo, &bg};
}

LstmGrads LstmGrads::like(const LstmParams& p) {
    LstmGrads g;
    g.g.wi = Matrix(p.wi.rows(), p.wi.cols());
    g.g.wf = Matrix(p.wf.rows(), p.wf.cols());
    g.g.wo = Matrix(p.wo.rows(), p.wo.cols());
    g.g.wg = Matrix(p.wg.rows(), p.wg.cols());
    g.g.ui = Matrix(p.ui.rows(), p.ui.cols());
    g.g.uf = Matrix(p.uf.rows(), p.uf.cols());
    g.g.uo = Matrix(p.uo.rows(), p.uo.cols());
    g.g.ug = Matrix(p.ug.rows(), p.ug.cols());
    g.g.bi = Matrix(1, p.bi.cols());
    g.g.bf = Matrix(1, p.bf.cols());
    g.g.bo = Matrix(1, p.bo.cols());
    g.g.bg = Matrix(1, p.bg.cols());
    return g;
}

void LstmGrads::zero() {
    for (Matrix* m : g.parameters()) m->fill(0.0);
}

void LstmTrace::resize(int steps, int hidden) {
    i = Matrix(steps, hidden);
    f = Matrix(steps, hidden);
    o = Matrix(steps, hidden);
    g = Matrix(steps, hidden);
    c = Matrix(steps, hidden);
    h = Matrix(steps, hidden);
    tanh_c = Matrix(steps, hidden);
}

LstmCellResult lstm_cell(std::span<const double> x, std::span<const double> h_prev,
                         std::span<const double> c_prev, const LstmParams& params) {
    const int hid = params.hidden_size();
    if (static_cast<int>(x.size()) != params.input_size() ||
        static_cast<int>(h_prev.size()) != hid || static_cast<int>(c_prev.size()) != hid)
        throw ShapeMismatchError("lstm_cell: input/state sizes do not match parameters");

    LstmCellResult r;
    r.gate_i.resize(static_cast<std::size_t>(hid));
    r.gate_f.resize(static_cast<std::size_t>(hid));
    r.gate_o.resize(static_cast<std::size_t>(hid));
    r.gate_g.resize(static_cast<std::size_t>(hid));
    gate_preact(params.wi, params.ui, params.bi, x, h_prev, r.gate_i);
    gate_preact(params.wf, params.uf, params.bf, x, h_prev, r.gate_f);
    gate_preact(params.wo, params.uo, params.bo, x, h_prev, r.gate_o);
    gate_preact(params.wg, params.ug, params.bg, x, h_prev, r.gate_g);
    r.h.resize(static_cast<std::size_t>(hid));
    r.c.resize(static_cast<std::size_t>(hid));
    for (int k = 0; k < hid; ++k) {
        const std::size_t s = static_cast<std::size_t>(k);
        r.gate_i[s] = sigmoid(r.gate_i[s]);
        r.gate_f[s] = sigmoid(r.gate_f[s]);
        r.gate_o[s] = sigmoid(r.gate_o[s]);
        r.gate_g[s] = std::tanh(r.gate_g[s]);
        r.c[s] = r.gate_f[s] * c_prev[s] + r.gate_i[s] * r.gate_g[s];
        r.h[s] = r.gate_o[s] * std::tanh(r.c[s]);
    }
    return r;
}

void lstm_forward(const LstmParams& params, const SeqView& xs, LstmTrace& trace) {
    const int steps = static_cast<int>(xs.size());
    const int hid = params.hidden_size();
    trace.resize(steps, hid);
    std::vector<double> h_prev(static_cast<std::size_t>(hid), 0.0);
    std::vector<double> c_prev(static_cast<std::size_t>(hid), 0.0);

    for (int t = 0; t < steps; ++t) {
        const std::size_t st = static_cast<std::size_t>(t);
        gate_preact(params.wi, params.ui, params.bi, xs[st], h_prev, trace.i.row_span(t));
        gate_preact(params.wf, params.uf, params.bf, xs[st], h_prev, trace.f.row_span(t));
        gate_preact(params.wo, params.uo, params.bo, xs[st], h_prev, trace.o.row_span(t));
        gate_preact(params.wg, params.ug, params.bg, xs[st], h_prev, trace.g.row_span(t));
        double* gi = trace.i.row(t);
        double* gf = trace.f.row(t);
        double* go = trace.o.row(t);
        double* gg = trace.g.row(t);
        double* c = trace.c.row(t);
        double* h = trace.h.row(t);
        double* tc = trace.tanh_c.row(t);
        for (int k = 0; k < hid; ++k) {
            gi[k] = sigmoid(gi[k]);
            gf[k] = sigmoid(gf[k]);
            go[k] = sigmoid(go[k]);
            gg[k] = std::tanh(gg[k]);
            c[k] = gf[k] * c_prev[static_cast<std::size_t>(k)] + gi[k] * gg[k];
            tc[k] = std::tanh(c[k]);
            h[k] = go[k] * tc[k];
        }
        std::copy(h, h + hid, h_prev.begin());
        std::copy(c, c + hid, c_prev.begin());
    }
}

void lstm_backward(const LstmParams& params, const SeqView& xs, const LstmTrace& trace,
                   const Matrix& dh_out, LstmGrads& grads, Matrix* dx) {
    const int steps = static_cast<int>(xs.size());
    const int hid = params.hidden_size();
    std::vector<double> dh(static_cast<std::size_t>(hid), 0.0);
    std::vector<double> dc(static_cast<std::size_t>(hid), 0.0);
    std::vector<double> ai(static_cast<std::size_t>(hid));
    std::vector<double> af(static_cast<std::size_t>(hid));
    std::vector<double> ao(static_cast<std::size_t>(hid));
    std::vector<double> ag(static_cast<std::size_t>(hid));
    std::vector<double> dh_prev(static_cast<std::size_t>(hid));

    for (int t = steps - 1; t >= 0; --t) {
        const double* gi = trace.i.row(t);
        const double* gf = trace.f.row(t);
        const double* go = trace.o.row(t);
        const double* gg = trace.g.row(t);
        const double* tc = trace.tanh_c.row(t);
        const double* out = dh_out.row(t);

        for (int k = 0; k < hid; ++k) {
            const std::size_t s = static_cast<std::size_t>(k);
            const double dht = dh[s] + out[k];
            const double dot_ = dht * tc[k];
            const double dct = dc[s] + dht * go[k] * (1.0 - tc[k] * tc[k]);
            const double c_prev = t > 0 ? trace.c(t - 1, k) : 0.0;
            ao[s] = dot_ * go[k] * (1.0 - go[k]);
            ai[s] = dct * gg[k] * gi[k] * (1.0 - gi[k]);
            af[s] = dct * c_prev * gf[k] * (1.0 - gf[k]);
            ag[s] = dct * gi[k] * (1.0 - gg[k] * gg[k]);
            dc[s] = dct * gf[k];
        }

        std::span<const double> x = xs[static_cast<std::size_t>(t)];
        rank1_update(grads.g.wi, 1.0, ai, x);
        rank1_update(grads.g.wf, 1.0, af, x);
        rank1_update(grads.g.wo, 1.0, ao, x);
        rank1_update(grads.g.wg, 1.0, ag, x);
        axpy(1.0, ai, grads.g.bi.row_span(0));
        axpy(1.0, af, grads.g.bf.row_span(0));
        axpy(1.0, ao, grads.g.bo.row_span(0));
        axpy(1.0, ag, grads.g.bg.row_span(0));
        if (t > 0) {
            std::span<const double> h_prev{trace.h.row(t - 1), static_cast<std::size_t>(hid)};
            rank1_update(grads.g.ui, 1.0, ai, h_prev);
            rank1_update(grads.g.uf, 1.0, af, h_prev);
            rank1_update(grads.g.uo, 1.0, ao, h_prev);
            rank1_update(grads.g.ug, 1.0, ag, h_prev);
        }
        if (dx) {
            std::span<double> dxt = dx->row_span(t);
            matvec_transpose_add(params.wi, ai, dxt);
            matvec_transpose_add(params.wf, af, dxt);
            matvec_transpose_add(params.wo, ao, dxt);
            matvec_transpose_add(params.wg, ag, dxt);
        }
        std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
        matvec_transpose_add(params.ui, ai, dh_prev);
        matvec_transpose_add(params.uf, af, dh_prev);
        matvec_transpose_add(params.uo, ao, dh_prev);
        matvec_transpose_add(params.ug, ag, dh_prev);
        dh = dh_prev;
    }
}

BiLstmParams BiLstmParams::create(int input_size, int hidden_size, std::uint64_t seed) {
    BiLstmParams p;
    p.fwd = LstmParams::create(input_size, hidden_size, derive_seed(seed, 0));
    p.bwd = LstmParams::create(input_size, hidden_size, derive_seed(seed, 1));
    return p;
}

BiLstmGrads BiLstmGrads::like(const BiLstmParams& p) {
    BiLstmGrads g;
    g.fwd = LstmGrads::like(p.fwd);
    g.bwd = LstmGrads::like(p.bwd);
    return g;
}

void BiLstmGrads::zero() {
    fwd.zero();
    bwd.zero();
}

Matrix bilstm_forward(const BiLstmParams& params, const SeqView& xs, BiLstmTrace& trace) {
    if (xs.empty()) throw EmptySequenceError("bilstm_forward: empty sequence");
    const int steps = static_cast<int>(xs.size());
    const int hid = params.fwd.hidden_size();

    lstm_forward(params.fwd, xs, trace.fwd);
    SeqView reversed(xs.rbegin(), xs.rend());
    lstm_forward(params.bwd, reversed, trace.bwd);

    Matrix out(steps, 2 * hid);
    for (int t = 0; t < steps; ++t) {
        double* row = out.row(t);
        const double* hf = trace.fwd.h.row(t);
        const double* hb = trace.bwd.h.row(steps - 1 - t);
        std::copy(hf, hf + hid, row);
        std::copy(hb, hb + hid, row + hid);
    }
    return out;
}

void bilstm_backward(const BiLstmParams& params, const SeqView& xs, const BiLstmTrace& trace,
                     const Matrix& d_out, BiLstmGrads& grads, Matrix* dx) {
    const int steps = static_cast<int>(xs.size());
    const int hid = params.fwd.hidden_size();

    Matrix d_fwd(steps, hid);
    Matrix d_bwd(steps, hid);  // indexed in the reversed direction's own time
    for (int t = 0; t < steps; ++t) {
        const double* row = d_out.row(t);
        std::copy(row, row + hid, d_fwd.row(t));
        std::copy(row + hid, row + 2 * hid, d_bwd.row(steps - 1 - t));
    }
    if (dx) dx->fill(0.0);

    lstm_backward(params.fwd, xs, trace.fwd, d_fwd, grads.fwd, dx ? dx : nullptr);
    SeqView reversed(xs.rbegin(), xs.rend());
    if (dx) {
        Matrix dx_rev(steps, static_cast<int>(xs[0].size()));
        lstm_backward(params.bwd, reversed, trace.bwd, d_bwd, grads.bwd, &dx_rev);
        for (int t = 0; t < steps; ++t)
            axpy(1.0, dx_rev.row_span(t), dx->row_span(steps - 1 - t));
    } else {
        lstm_backward(params.bwd, reversed, trace.bwd, d_bwd, grads.bwd, nullptr);
    }
}

}  // namespace reliance::nn
