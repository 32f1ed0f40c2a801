#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tscab/errors.hpp"
#include "tscab/random.hpp"
#include "tscab/temperature.hpp"

namespace tscab {

struct ForecastConfig {
    Timestamp interval = 300;  // seconds
    std::vector<int> horizons = {1, 2, 3, 6, 12, 36, 72, 144};
    std::size_t linear_lag = 12;
    std::size_t hidden = 8;
    int epochs = 80;
    double learning_rate = 0.05;
    std::size_t bptt_window = 16;
    double train_fraction = 0.8;
    std::size_t max_train_intervals = 1024;  // cap on refit series length

    void validate() const {
        if (interval <= 0) throw ArgumentError("ForecastConfig: interval must be positive");
        for (std::size_t i = 1; i < horizons.size(); ++i)
            if (horizons[i] <= horizons[i - 1])
                throw ArgumentError("ForecastConfig: horizons must be strictly increasing");
        if (horizons.empty() || horizons.front() < 1)
            throw ArgumentError("ForecastConfig: need at least one positive horizon");
    }
};

// ---------------------------------------------------------------------------
// Linear autoregression

struct LinearModel {
    std::size_t lag = 1;
    double intercept = 0.0;
    std::vector<double> coefficients;  // coefficients[i] multiplies y_{t-1-i}
    bool ridged = false;               // rank-deficient fit fell back to ridge

    double predict_next(const std::vector<double>& history) const {
        if (history.size() < lag)
            throw ArgumentError("LinearModel: history shorter than the lag");
        if (coefficients.size() != lag)
            throw ArgumentError("LinearModel: coefficient count does not match the lag");
        double y = intercept;
        for (std::size_t i = 0; i < lag; ++i)
            y += coefficients[i] * history[history.size() - 1 - i];
        return y;
    }
};

namespace detail {

// Gaussian elimination with partial pivoting; returns false on a pivot too
// small to trust.
inline bool solve_in_place(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        if (std::abs(a[pivot][col]) < 1e-10) return false;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double factor = a[row][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[row][k] -= factor * a[col][k];
            b[row] -= factor * b[col];
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        for (std::size_t k = col + 1; k < n; ++k) b[col] -= a[col][k] * b[k];
        b[col] /= a[col][col];
    }
    return true;
}

}  // namespace detail

// Ordinary least squares of y_t on its previous `lag` values. A
// rank-deficient design matrix falls back to ridge with lambda = 1e-6 and
// marks the model accordingly.
inline LinearModel fit_linear(const std::vector<double>& history, std::size_t lag) {
    if (lag == 0) throw ArgumentError("fit_linear: lag must be at least 1");
    if (history.size() <= lag)
        throw ArgumentError("fit_linear: history must be longer than the lag");

    const std::size_t dim = lag + 1;
    const std::size_t rows = history.size() - lag;
    // normal equations: (X^T X) beta = X^T y with X rows (1, y_{t-1}..y_{t-lag})
    std::vector<std::vector<double>> xtx(dim, std::vector<double>(dim, 0.0));
    std::vector<double> xty(dim, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> x(dim);
        x[0] = 1.0;
        for (std::size_t i = 0; i < lag; ++i) x[1 + i] = history[lag + r - 1 - i];
        const double y = history[lag + r];
        for (std::size_t i = 0; i < dim; ++i) {
            xty[i] += x[i] * y;
            for (std::size_t j = 0; j < dim; ++j) xtx[i][j] += x[i] * x[j];
        }
    }

    LinearModel model;
    model.lag = lag;
    auto a = xtx;
    auto b = xty;
    if (!detail::solve_in_place(a, b)) {
        a = xtx;
        b = xty;
        for (std::size_t i = 0; i < dim; ++i) a[i][i] += 1e-6;
        if (!detail::solve_in_place(a, b))
            throw TrainingError("fit_linear: ridge system is singular");
        model.ridged = true;
    }
    model.intercept = b[0];
    model.coefficients.assign(b.begin() + 1, b.end());
    return model;
}

// ---------------------------------------------------------------------------
// LSTM

// Scalar-input, scalar-output LSTM cell with a linear readout. Gates follow
// the usual logistic/tanh wiring: f, i, o through sigma, g through tanh,
// C_t = g*i + C_{t-1}*f, h_t = tanh(C_t)*o.
struct LSTMModel {
    std::size_t hidden = 8;
    std::vector<double> w_fx, w_ix, w_gx, w_ox;  // input weights, size hidden
    std::vector<double> w_fh, w_ih, w_gh, w_oh;  // recurrent, hidden*hidden row-major
    std::vector<double> b_f, b_i, b_g, b_o;      // biases, size hidden
    std::vector<double> w_y;                     // readout, size hidden
    double b_y = 0.0;

    bool initialized() const { return w_fx.size() == hidden; }
};

struct LSTMState {
    std::vector<double> h, c;
    explicit LSTMState(std::size_t hidden = 0) : h(hidden, 0.0), c(hidden, 0.0) {}
    friend bool operator==(const LSTMState&, const LSTMState&) = default;
};

inline LSTMModel make_lstm(std::size_t hidden, std::uint64_t seed) {
    LSTMModel m;
    m.hidden = hidden;
    Rng rng(seed);
    const double r = 1.0 / std::sqrt(static_cast<double>(hidden));
    auto fill = [&](std::vector<double>& v, std::size_t n) {
        v.resize(n);
        for (auto& x : v) x = rng.next_in(-r, r);
    };
    fill(m.w_fx, hidden); fill(m.w_ix, hidden); fill(m.w_gx, hidden); fill(m.w_ox, hidden);
    fill(m.w_fh, hidden * hidden); fill(m.w_ih, hidden * hidden);
    fill(m.w_gh, hidden * hidden); fill(m.w_oh, hidden * hidden);
    m.b_f.assign(hidden, 1.0);  // open forget gates make long memories learnable
    m.b_i.assign(hidden, 0.0);
    m.b_g.assign(hidden, 0.0);
    m.b_o.assign(hidden, 0.0);
    fill(m.w_y, hidden);
    m.b_y = 0.0;
    return m;
}

// Flat views over every trainable parameter, in a fixed order shared with
// the gradient vector.
inline std::vector<double*> lstm_parameters(LSTMModel& m) {
    std::vector<double*> out;
    for (auto* vec : {&m.w_fx, &m.w_ix, &m.w_gx, &m.w_ox, &m.w_fh, &m.w_ih, &m.w_gh, &m.w_oh,
                      &m.b_f, &m.b_i, &m.b_g, &m.b_o, &m.w_y})
        for (auto& x : *vec) out.push_back(&x);
    out.push_back(&m.b_y);
    return out;
}

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LSTMStepCache {
    double x;
    std::vector<double> h_prev, c_prev;
    std::vector<double> f, i, g, o, c, hc, h;
    double y;
};

inline LSTMStepCache lstm_step(const LSTMModel& m, double x, const LSTMState& state) {
    const std::size_t n = m.hidden;
    LSTMStepCache cache;
    cache.x = x;
    cache.h_prev = state.h;
    cache.c_prev = state.c;
    cache.f.resize(n); cache.i.resize(n); cache.g.resize(n); cache.o.resize(n);
    cache.c.resize(n); cache.hc.resize(n); cache.h.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
        double af = m.w_fx[u] * x + m.b_f[u];
        double ai = m.w_ix[u] * x + m.b_i[u];
        double ag = m.w_gx[u] * x + m.b_g[u];
        double ao = m.w_ox[u] * x + m.b_o[u];
        for (std::size_t v = 0; v < n; ++v) {
            af += m.w_fh[u * n + v] * state.h[v];
            ai += m.w_ih[u * n + v] * state.h[v];
            ag += m.w_gh[u * n + v] * state.h[v];
            ao += m.w_oh[u * n + v] * state.h[v];
        }
        cache.f[u] = sigmoid(af);
        cache.i[u] = sigmoid(ai);
        cache.g[u] = std::tanh(ag);
        cache.o[u] = sigmoid(ao);
        cache.c[u] = cache.g[u] * cache.i[u] + state.c[u] * cache.f[u];
        cache.hc[u] = std::tanh(cache.c[u]);
        cache.h[u] = cache.hc[u] * cache.o[u];
    }
    cache.y = m.b_y;
    for (std::size_t u = 0; u < n; ++u) cache.y += m.w_y[u] * cache.h[u];
    return cache;
}

}  // namespace detail

// Run the cell over a sequence from the given state (zeros by default) and
// project each hidden vector to a scalar output.
inline std::pair<std::vector<double>, LSTMState> lstm_forward(const LSTMModel& model,
                                                              const std::vector<double>& sequence,
                                                              LSTMState state = LSTMState()) {
    if (sequence.empty()) throw ArgumentError("lstm_forward: empty sequence");
    if (!model.initialized()) throw ArgumentError("lstm_forward: model has no weights");
    if (state.h.empty()) state = LSTMState(model.hidden);
    std::vector<double> outputs;
    outputs.reserve(sequence.size());
    for (double x : sequence) {
        auto cache = detail::lstm_step(model, x, state);
        state.h = cache.h;
        state.c = cache.c;
        outputs.push_back(cache.y);
    }
    return {std::move(outputs), std::move(state)};
}

struct LSTMBackward {
    std::vector<double> gradient;  // aligned with lstm_parameters()
    double loss = 0.0;             // mean squared one-step error over the chunk
    LSTMState final_state;
};

// Forward + backward over one chunk. Gradients are of the mean squared
// error of outputs against targets; truncation happens by simply not
// flowing gradients past the chunk's initial state.
inline LSTMBackward lstm_backward(const LSTMModel& model, const std::vector<double>& inputs,
                                  const std::vector<double>& targets, LSTMState state,
                                  double loss_normalizer = 0.0) {
    if (inputs.size() != targets.size() || inputs.empty())
        throw ArgumentError("lstm_backward: inputs and targets must align");
    const std::size_t n = model.hidden;
    if (state.h.empty()) state = LSTMState(n);
    const double norm =
        loss_normalizer > 0 ? loss_normalizer : static_cast<double>(inputs.size());

    std::vector<detail::LSTMStepCache> caches;
    caches.reserve(inputs.size());
    double loss = 0.0;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        auto cache = detail::lstm_step(model, inputs[t], state);
        state.h = cache.h;
        state.c = cache.c;
        const double err = cache.y - targets[t];
        loss += err * err;
        caches.push_back(std::move(cache));
    }
    loss /= norm;

    LSTMModel grads;
    grads.hidden = n;
    grads.w_fx.assign(n, 0.0); grads.w_ix.assign(n, 0.0);
    grads.w_gx.assign(n, 0.0); grads.w_ox.assign(n, 0.0);
    grads.w_fh.assign(n * n, 0.0); grads.w_ih.assign(n * n, 0.0);
    grads.w_gh.assign(n * n, 0.0); grads.w_oh.assign(n * n, 0.0);
    grads.b_f.assign(n, 0.0); grads.b_i.assign(n, 0.0);
    grads.b_g.assign(n, 0.0); grads.b_o.assign(n, 0.0);
    grads.w_y.assign(n, 0.0);
    grads.b_y = 0.0;

    std::vector<double> dh_next(n, 0.0), dc_next(n, 0.0);
    for (std::size_t t = caches.size(); t-- > 0;) {
        const auto& cache = caches[t];
        const double dy = 2.0 * (cache.y - targets[t]) / norm;
        grads.b_y += dy;
        std::vector<double> dh = dh_next;
        for (std::size_t u = 0; u < n; ++u) {
            grads.w_y[u] += dy * cache.h[u];
            dh[u] += dy * model.w_y[u];
        }
        std::vector<double> dh_prev(n, 0.0), dc_prev(n, 0.0);
        for (std::size_t u = 0; u < n; ++u) {
            const double do_ = dh[u] * cache.hc[u];
            const double dhc = dh[u] * cache.o[u];
            const double dc = dhc * (1.0 - cache.hc[u] * cache.hc[u]) + dc_next[u];
            const double df = dc * cache.c_prev[u];
            const double di = dc * cache.g[u];
            const double dg = dc * cache.i[u];
            dc_prev[u] = dc * cache.f[u];
            const double daf = df * cache.f[u] * (1.0 - cache.f[u]);
            const double dai = di * cache.i[u] * (1.0 - cache.i[u]);
            const double dao = do_ * cache.o[u] * (1.0 - cache.o[u]);
            const double dag = dg * (1.0 - cache.g[u] * cache.g[u]);
            grads.w_fx[u] += daf * cache.x;
            grads.w_ix[u] += dai * cache.x;
            grads.w_gx[u] += dag * cache.x;
            grads.w_ox[u] += dao * cache.x;
            grads.b_f[u] += daf;
            grads.b_i[u] += dai;
            grads.b_g[u] += dag;
            grads.b_o[u] += dao;
            for (std::size_t v = 0; v < n; ++v) {
                grads.w_fh[u * n + v] += daf * cache.h_prev[v];
                grads.w_ih[u * n + v] += dai * cache.h_prev[v];
                grads.w_gh[u * n + v] += dag * cache.h_prev[v];
                grads.w_oh[u * n + v] += dao * cache.h_prev[v];
                dh_prev[v] += model.w_fh[u * n + v] * daf + model.w_ih[u * n + v] * dai +
                              model.w_gh[u * n + v] * dag + model.w_oh[u * n + v] * dao;
            }
        }
        dh_next = std::move(dh_prev);
        dc_next = std::move(dc_prev);
    }

    LSTMBackward out;
    auto refs = lstm_parameters(grads);
    out.gradient.reserve(refs.size());
    for (double* g : refs) out.gradient.push_back(*g);
    out.loss = loss;
    out.final_state = std::move(state);
    return out;
}

// Mean squared one-step-ahead error of the model over a series.
inline double lstm_series_loss(const LSTMModel& model, const std::vector<double>& series) {
    if (series.size() < 2) throw ArgumentError("lstm_series_loss: series too short");
    std::vector<double> inputs(series.begin(), series.end() - 1);
    auto [outputs, state] = lstm_forward(model, inputs);
    double loss = 0.0;
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        const double err = outputs[t] - series[t + 1];
        loss += err * err;
    }
    return loss / static_cast<double>(outputs.size());
}

// Truncated backpropagation through time with plain gradient descent and
// global gradient-norm clipping. Keeps the best weights seen over the
// epochs, so the returned model never scores worse than the initial one.
inline LSTMModel train_lstm(LSTMModel model, const std::vector<double>& series, int epochs,
                            double learning_rate, std::uint64_t seed,
                            std::size_t bptt_window = 16, double clip_norm = 5.0) {
    if (bptt_window == 0) throw ArgumentError("train_lstm: bptt window must be positive");
    if (series.size() < 2 * bptt_window)
        throw ArgumentError("train_lstm: series shorter than twice the unroll window");
    if (!model.initialized()) model = make_lstm(model.hidden, seed);

    LSTMModel best = model;
    double best_loss = lstm_series_loss(model, series);
    if (!std::isfinite(best_loss))
        throw TrainingError("train_lstm: non-finite loss before training");

    const std::size_t steps = series.size() - 1;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        LSTMState carry(model.hidden);
        for (std::size_t begin = 0; begin < steps; begin += bptt_window) {
            const std::size_t end = std::min(begin + bptt_window, steps);
            std::vector<double> inputs(series.begin() + begin, series.begin() + end);
            std::vector<double> targets(series.begin() + begin + 1, series.begin() + end + 1);
            auto result = lstm_backward(model, inputs, targets, carry);
            if (!std::isfinite(result.loss))
                throw TrainingError("train_lstm: loss diverged at epoch " +
                                    std::to_string(epoch));
            carry = result.final_state;

            double norm_sq = 0.0;
            for (double g : result.gradient) norm_sq += g * g;
            const double norm = std::sqrt(norm_sq);
            const double scale = norm > clip_norm ? clip_norm / norm : 1.0;
            auto params = lstm_parameters(model);
            for (std::size_t i = 0; i < params.size(); ++i)
                *params[i] -= learning_rate * scale * result.gradient[i];
        }
        const double loss = lstm_series_loss(model, series);
        if (!std::isfinite(loss)) throw TrainingError("train_lstm: loss diverged");
        if (loss < best_loss) {
            best_loss = loss;
            best = model;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Ensemble

// Normalized inverse validation error: the more accurate model carries the
// larger weight. A perfect model takes all the weight; two perfect models
// split it evenly.
inline std::pair<double, double> compute_weights(double error_linear, double error_lstm) {
    if (error_linear < 0 || error_lstm < 0)
        throw ArgumentError("compute_weights: errors must be non-negative");
    if (error_linear == 0 && error_lstm == 0) return {0.5, 0.5};
    if (error_linear == 0) return {1.0, 0.0};
    if (error_lstm == 0) return {0.0, 1.0};
    const double total = error_linear + error_lstm;
    return {error_lstm / total, error_linear / total};
}

struct EnsembleModel {
    LinearModel linear;
    LSTMModel lstm;
    double w_linear = 0.5;
    double w_lstm = 0.5;
    double mean = 0.0;    // standardization of the LSTM input stream
    double stddev = 1.0;
    double validation_sse_linear = 0.0;
    double validation_sse_lstm = 0.0;
};

// Fit both members on the leading train split, weight them by inverse sum of
// squared one-step errors on the trailing validation slice.
inline EnsembleModel fit_ensemble(const std::vector<double>& series, const ForecastConfig& config,
                                  std::uint64_t seed) {
    config.validate();
    const std::size_t n = series.size();
    const auto train_len = static_cast<std::size_t>(static_cast<double>(n) * config.train_fraction);
    if (train_len <= config.linear_lag + 1 || train_len < 2 * config.bptt_window)
        throw ArgumentError("fit_ensemble: series too short for the configured models");

    std::vector<double> train(series.begin(), series.begin() + train_len);

    EnsembleModel ensemble;
    ensemble.linear = fit_linear(train, config.linear_lag);

    double mean = 0.0;
    for (double x : train) mean += x;
    mean /= static_cast<double>(train_len);
    double var = 0.0;
    for (double x : train) var += (x - mean) * (x - mean);
    var /= static_cast<double>(train_len);
    ensemble.mean = mean;
    ensemble.stddev = var > 1e-18 ? std::sqrt(var) : 1.0;

    std::vector<double> train_z(train_len);
    for (std::size_t i = 0; i < train_len; ++i)
        train_z[i] = (train[i] - mean) / ensemble.stddev;
    LSTMModel raw;
    raw.hidden = config.hidden;
    ensemble.lstm = train_lstm(raw, train_z, config.epochs, config.learning_rate, seed,
                               config.bptt_window);

    // one-step validation errors on the held-out tail
    double sse_linear = 0.0, sse_lstm = 0.0;
    if (train_len < n) {
        std::vector<double> prefix_z(n);
        for (std::size_t i = 0; i < n; ++i) prefix_z[i] = (series[i] - mean) / ensemble.stddev;
        LSTMState state(config.hidden);
        double lstm_pred_z = 0.0;
        for (std::size_t t = 0; t < n - 1; ++t) {
            auto cache = detail::lstm_step(ensemble.lstm, prefix_z[t], state);
            state.h = cache.h;
            state.c = cache.c;
            lstm_pred_z = cache.y;
            if (t + 1 >= train_len) {
                std::vector<double> prefix(series.begin(), series.begin() + t + 1);
                const double lin = ensemble.linear.predict_next(prefix);
                const double lstm = mean + ensemble.stddev * lstm_pred_z;
                sse_linear += (lin - series[t + 1]) * (lin - series[t + 1]);
                sse_lstm += (lstm - series[t + 1]) * (lstm - series[t + 1]);
            }
        }
    }
    ensemble.validation_sse_linear = sse_linear;
    ensemble.validation_sse_lstm = sse_lstm;
    std::tie(ensemble.w_linear, ensemble.w_lstm) = compute_weights(sse_linear, sse_lstm);
    return ensemble;
}

// Incremental forecast cursor: feed observations one at a time, forecast
// from the current position without re-running the recurrent warm-up. Used
// for rolling-origin evaluation; ensemble_predict is the one-shot wrapper.
class EnsemblePredictor {
public:
    explicit EnsemblePredictor(const EnsembleModel& model)
        : model_(&model), state_(model.lstm.hidden) {}

    void observe(double value) {
        tail_.push_back(value);
        if (tail_.size() > model_->linear.lag + 1)
            tail_.erase(tail_.begin());
        step_lstm(value);
    }

    std::size_t observed() const { return seen_; }

    // Multi-step forecast from the current position: combine the members
    // step by step and feed the combined value back into both. Arrival
    // counts cannot go negative, so the combination is clamped at zero.
    std::vector<double> forecast(std::size_t steps) const {
        if (tail_.size() < model_->linear.lag)
            throw ArgumentError("EnsemblePredictor: too little history for the linear lag");
        std::vector<double> working = tail_;
        LSTMState state = state_;
        double pred_z = lstm_pred_z_;
        std::vector<double> out;
        out.reserve(steps);
        for (std::size_t s = 0; s < steps; ++s) {
            const double lin = model_->linear.predict_next(working);
            const double lstm = model_->mean + model_->stddev * pred_z;
            const double combined =
                std::max(0.0, model_->w_linear * lin + model_->w_lstm * lstm);
            out.push_back(combined);
            working.push_back(combined);
            auto cache = detail::lstm_step(
                model_->lstm, (combined - model_->mean) / model_->stddev, state);
            state.h = cache.h;
            state.c = cache.c;
            pred_z = cache.y;
        }
        return out;
    }

private:
    void step_lstm(double value) {
        auto cache = detail::lstm_step(
            model_->lstm, (value - model_->mean) / model_->stddev, state_);
        state_.h = cache.h;
        state_.c = cache.c;
        lstm_pred_z_ = cache.y;
        ++seen_;
    }

    const EnsembleModel* model_;
    std::vector<double> tail_;  // last lag+1 observations
    LSTMState state_;
    double lstm_pred_z_ = 0.0;
    std::size_t seen_ = 0;
};

inline std::vector<double> ensemble_predict(const EnsembleModel& ensemble,
                                            const std::vector<double>& history,
                                            std::size_t steps) {
    if (history.size() < ensemble.linear.lag)
        throw ArgumentError("ensemble_predict: history shorter than the linear lag");
    EnsemblePredictor cursor(ensemble);
    for (double x : history) cursor.observe(x);
    return cursor.forecast(steps);
}

// Last observed value repeated; the ranking baseline.
inline std::vector<double> naive_last_value(const std::vector<double>& history,
                                            std::size_t steps) {
    if (history.empty()) throw ArgumentError("naive_last_value: empty history");
    return std::vector<double>(steps, history.back());
}

// ---------------------------------------------------------------------------
// Metrics

struct Metrics {
    double mse = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
};

inline Metrics metrics(const std::vector<double>& predicted, const std::vector<double>& actual) {
    if (predicted.size() != actual.size() || predicted.empty())
        throw ArgumentError("metrics: sequences must be non-empty and of equal length");
    Metrics m;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double err = predicted[i] - actual[i];
        m.mse += err * err;
        m.mae += std::abs(err);
    }
    m.mse /= static_cast<double>(predicted.size());
    m.mae /= static_cast<double>(predicted.size());
    m.rmse = std::sqrt(m.mse);
    return m;
}

inline void write_metrics_row(std::ostream& os, int cluster_id, int horizon, const Metrics& m) {
    os << cluster_id << ',' << horizon << ',' << std::setprecision(17) << m.mse << ',' << m.mae
       << ',' << m.rmse << '\n';
}

// ---------------------------------------------------------------------------
// Snapshot format: a "tscab-model v1" header followed by one line per weight
// block, decimal values, row-major.

namespace detail {

inline void write_block(std::ostream& os, const char* name, const std::vector<double>& values) {
    os << name;
    for (double v : values) os << ' ' << std::setprecision(17) << v;
    os << '\n';
}

inline std::vector<double> read_block(std::istream& is, const char* name, std::size_t expect) {
    std::string line;
    if (!std::getline(is, line)) throw ArgumentError("model snapshot: truncated file");
    std::istringstream ls(line);
    std::string label;
    ls >> label;
    if (label != name)
        throw ArgumentError(std::string("model snapshot: expected block ") + name);
    std::vector<double> values;
    double v;
    while (ls >> v) values.push_back(v);
    if (values.size() != expect)
        throw ArgumentError(std::string("model snapshot: bad size for block ") + name);
    return values;
}

}  // namespace detail

inline void write_model(std::ostream& os, const EnsembleModel& m) {
    os << "tscab-model v1\n";
    os << "meta " << std::setprecision(17) << m.w_linear << ' ' << m.w_lstm << ' ' << m.mean
       << ' ' << m.stddev << ' ' << m.validation_sse_linear << ' ' << m.validation_sse_lstm
       << '\n';
    os << "linear " << m.linear.lag << ' ' << (m.linear.ridged ? 1 : 0) << ' '
       << std::setprecision(17) << m.linear.intercept;
    for (double c : m.linear.coefficients) os << ' ' << std::setprecision(17) << c;
    os << '\n';
    os << "lstm " << m.lstm.hidden << '\n';
    detail::write_block(os, "w_fx", m.lstm.w_fx);
    detail::write_block(os, "w_ix", m.lstm.w_ix);
    detail::write_block(os, "w_gx", m.lstm.w_gx);
    detail::write_block(os, "w_ox", m.lstm.w_ox);
    detail::write_block(os, "w_fh", m.lstm.w_fh);
    detail::write_block(os, "w_ih", m.lstm.w_ih);
    detail::write_block(os, "w_gh", m.lstm.w_gh);
    detail::write_block(os, "w_oh", m.lstm.w_oh);
    detail::write_block(os, "b_f", m.lstm.b_f);
    detail::write_block(os, "b_i", m.lstm.b_i);
    detail::write_block(os, "b_g", m.lstm.b_g);
    detail::write_block(os, "b_o", m.lstm.b_o);
    detail::write_block(os, "w_y", m.lstm.w_y);
    detail::write_block(os, "b_y", {m.lstm.b_y});
}

inline EnsembleModel read_model(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "tscab-model v1")
        throw ArgumentError("model snapshot: unknown version header");
    EnsembleModel m;
    if (!std::getline(is, line)) throw ArgumentError("model snapshot: truncated file");
    {
        std::istringstream ls(line);
        std::string label;
        ls >> label >> m.w_linear >> m.w_lstm >> m.mean >> m.stddev >>
            m.validation_sse_linear >> m.validation_sse_lstm;
        if (label != "meta") throw ArgumentError("model snapshot: expected meta line");
    }
    if (!std::getline(is, line)) throw ArgumentError("model snapshot: truncated file");
    {
        std::istringstream ls(line);
        std::string label;
        int ridged = 0;
        ls >> label >> m.linear.lag >> ridged >> m.linear.intercept;
        if (label != "linear") throw ArgumentError("model snapshot: expected linear line");
        m.linear.ridged = ridged != 0;
        double c;
        while (ls >> c) m.linear.coefficients.push_back(c);
        if (m.linear.coefficients.size() != m.linear.lag)
            throw ArgumentError("model snapshot: coefficient count != lag");
    }
    if (!std::getline(is, line)) throw ArgumentError("model snapshot: truncated file");
    {
        std::istringstream ls(line);
        std::string label;
        ls >> label >> m.lstm.hidden;
        if (label != "lstm") throw ArgumentError("model snapshot: expected lstm line");
    }
    const std::size_t n = m.lstm.hidden;
    m.lstm.w_fx = detail::read_block(is, "w_fx", n);
    m.lstm.w_ix = detail::read_block(is, "w_ix", n);
    m.lstm.w_gx = detail::read_block(is, "w_gx", n);
    m.lstm.w_ox = detail::read_block(is, "w_ox", n);
    m.lstm.w_fh = detail::read_block(is, "w_fh", n * n);
    m.lstm.w_ih = detail::read_block(is, "w_ih", n * n);
    m.lstm.w_gh = detail::read_block(is, "w_gh", n * n);
    m.lstm.w_oh = detail::read_block(is, "w_oh", n * n);
    m.lstm.b_f = detail::read_block(is, "b_f", n);
    m.lstm.b_i = detail::read_block(is, "b_i", n);
    m.lstm.b_g = detail::read_block(is, "b_g", n);
    m.lstm.b_o = detail::read_block(is, "b_o", n);
    m.lstm.w_y = detail::read_block(is, "w_y", n);
    m.lstm.b_y = detail::read_block(is, "b_y", 1)[0];
    return m;
}

}  // namespace tscab
