#include "mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "mathfns.hpp"
#include "rng.hpp"

namespace cbo {

namespace {

constexpr std::uint64_t kShuffleSalt = 0x9d2c5680f3a1c4e7ULL;

std::atomic<std::uint64_t> g_train_invocations{0};

void check_box(std::span<const double> lo, std::span<const double> hi) {
    if (lo.empty() || lo.size() != hi.size())
        throw ArgumentError("normalizer: empty or mismatched bounds");
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i]))
            throw ArgumentError("normalizer: bounds must be finite with lo < hi");
    }
}

void fit_targets(Normalizer& n, std::span<const Observation> data) {
    std::vector<double> ys;
    ys.reserve(data.size());
    for (const Observation& o : data) ys.push_back(o.y);
    double m = 0.0;
    for (double y : ys) m += y;
    m /= static_cast<double>(ys.size());
    double v = 0.0;
    for (double y : ys) v += (y - m) * (y - m);
    v /= static_cast<double>(ys.size());
    n.y_mean = m;
    const double s = std::sqrt(v);
    n.y_std = (std::isfinite(s) && s > 0.0) ? s : 1.0;
}

}  // namespace

void Normalizer::apply_x(std::span<const double> x, std::span<double> out) const {
    if (x.size() != lo.size() || out.size() != lo.size())
        throw ArgumentError("normalizer: input dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = std::clamp(x[i], lo[i], hi[i]);
        out[i] = (c - lo[i]) / (hi[i] - lo[i]);
    }
}

std::vector<double> Normalizer::apply_x(std::span<const double> x) const {
    std::vector<double> out(lo.size());
    apply_x(x, out);
    return out;
}

std::vector<double> Normalizer::invert_x(std::span<const double> xn) const {
    if (xn.size() != lo.size()) throw ArgumentError("normalizer: input dimension mismatch");
    std::vector<double> out(lo.size());
    for (std::size_t i = 0; i < xn.size(); ++i) out[i] = lo[i] + xn[i] * (hi[i] - lo[i]);
    return out;
}

Normalizer fit_normalizer(std::span<const Observation> data) {
    validate_observations(data);
    const std::size_t d = data.front().x.size();
    Normalizer n;
    n.lo.assign(d, std::numeric_limits<double>::infinity());
    n.hi.assign(d, -std::numeric_limits<double>::infinity());
    for (const Observation& o : data) {
        for (std::size_t i = 0; i < d; ++i) {
            n.lo[i] = std::min(n.lo[i], o.x[i]);
            n.hi[i] = std::max(n.hi[i], o.x[i]);
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (!(n.hi[i] > n.lo[i])) n.hi[i] = n.lo[i] + 1.0;  // degenerate dimension
    }
    fit_targets(n, data);
    return n;
}

Normalizer fit_normalizer(std::span<const Observation> data, std::span<const double> lo,
                          std::span<const double> hi) {
    validate_observations(data);
    check_box(lo, hi);
    if (lo.size() != data.front().x.size())
        throw ArgumentError("normalizer: box dimension does not match data");
    Normalizer n;
    n.lo.assign(lo.begin(), lo.end());
    n.hi.assign(hi.begin(), hi.end());
    fit_targets(n, data);
    return n;
}

double one_cycle_lr(long long step, long long total_steps, double peak_lr) {
    if (total_steps < 1 || step < 0 || step >= total_steps)
        throw ArgumentError("one_cycle_lr: step outside [0, total_steps)");
    if (!(peak_lr > 0.0) || !std::isfinite(peak_lr))
        throw ArgumentError("one_cycle_lr: peak_lr must be positive");
    const double t = static_cast<double>(total_steps);
    const double s = static_cast<double>(step);
    const double p1 = 0.45 * t;
    const double p2 = 0.90 * t;
    const auto lerp = [](double a, double b, double f) { return a + (b - a) * f; };
    if (s <= p1) return lerp(peak_lr / 10.0, peak_lr, p1 > 0.0 ? s / p1 : 1.0);
    if (s <= p2) return lerp(peak_lr, peak_lr / 10.0, (s - p1) / (p2 - p1));
    return lerp(peak_lr / 10.0, peak_lr / 100.0, (s - p2) / (t - p2));
}

Mlp init_mlp(int input_dim, std::uint64_t seed) {
    if (input_dim < 1) throw ArgumentError("init_mlp: input_dim must be >= 1");
    Mlp net;
    net.input_dim = input_dim;
    net.seed = seed;
    net.params.assign(net.param_count(), 0.0);
    Rng rng(seed);
    const auto fill = [&](std::size_t off, std::size_t count, int fan_in) {
        const double r = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < count; ++i) net.params[off + i] = rng.uniform(-r, r);
    };
    const std::size_t h = Mlp::kHidden;
    fill(net.w1(), h * static_cast<std::size_t>(input_dim), input_dim);
    fill(net.w2(), h * h, Mlp::kHidden);
    fill(net.w3(), h * h, Mlp::kHidden);
    fill(net.w4(), static_cast<std::size_t>(Mlp::kOut) * h, Mlp::kHidden);
    return net;
}

PredictiveHead Mlp::forward(std::span<const double> xn) const {
    if (static_cast<int>(xn.size()) != input_dim)
        throw ArgumentError("forward: input dimension mismatch");
    constexpr int h = kHidden;
    const double* p = params.data();
    double cur[h], nxt[h];
    for (int j = 0; j < h; ++j) {
        double acc = p[b1() + j];
        const double* w = p + w1() + static_cast<std::size_t>(j) * input_dim;
        for (int k = 0; k < input_dim; ++k) acc += w[k] * xn[k];
        cur[j] = std::tanh(acc);
    }
    for (int layer = 0; layer < 2; ++layer) {
        const std::size_t woff = layer == 0 ? w2() : w3();
        const std::size_t boff = layer == 0 ? b2() : b3();
        for (int j = 0; j < h; ++j) {
            double acc = p[boff + j];
            const double* w = p + woff + static_cast<std::size_t>(j) * h;
            for (int k = 0; k < h; ++k) acc += w[k] * cur[k];
            nxt[j] = std::tanh(acc);
        }
        std::memcpy(cur, nxt, sizeof(cur));
    }
    double out[Mlp::kOut];
    for (int o = 0; o < kOut; ++o) {
        double acc = p[b4() + o];
        const double* w = p + w4() + static_cast<std::size_t>(o) * h;
        for (int k = 0; k < h; ++k) acc += w[k] * cur[k];
        out[o] = acc;
    }
    return {out[0], softplus(out[1]) + kVarFloor};
}

namespace {

constexpr int kH = Mlp::kHidden;

// Reusable buffers for one batch pass.  Weight transposes let the forward
// accumulation run with independent per-unit lanes, which vectorizes without
// any floating-point reassociation.
struct Work {
    int cap = 0;
    std::vector<double> a1, a2, a3, out, dout, dz, da;
    std::vector<double> w1t, w2t, w3t;

    void resize(int batch, int dim) {
        cap = batch;
        a1.assign(static_cast<std::size_t>(batch) * kH, 0.0);
        a2 = a1;
        a3 = a1;
        da = a1;
        dz = a1;
        out.assign(static_cast<std::size_t>(batch) * Mlp::kOut, 0.0);
        dout = out;
        w1t.assign(static_cast<std::size_t>(dim) * kH, 0.0);
        w2t.assign(static_cast<std::size_t>(kH) * kH, 0.0);
        w3t.assign(static_cast<std::size_t>(kH) * kH, 0.0);
    }
};

void refresh_transposes(const Mlp& net, Work& w) {
    const double* p = net.params.data();
    const int d = net.input_dim;
    for (int j = 0; j < kH; ++j)
        for (int k = 0; k < d; ++k) w.w1t[static_cast<std::size_t>(k) * kH + j] = p[net.w1() + static_cast<std::size_t>(j) * d + k];
    for (int j = 0; j < kH; ++j)
        for (int k = 0; k < kH; ++k) {
            w.w2t[static_cast<std::size_t>(k) * kH + j] = p[net.w2() + static_cast<std::size_t>(j) * kH + k];
            w.w3t[static_cast<std::size_t>(k) * kH + j] = p[net.w3() + static_cast<std::size_t>(j) * kH + k];
        }
}

void forward_batch(const Mlp& net, const double* xb, int batch, Work& w) {
    const double* p = net.params.data();
    const int d = net.input_dim;
    double acc[kH];
    for (int b = 0; b < batch; ++b) {
        for (int j = 0; j < kH; ++j) acc[j] = p[net.b1() + j];
        const double* x = xb + static_cast<std::size_t>(b) * d;
        for (int k = 0; k < d; ++k) {
            const double xv = x[k];
            const double* wt = w.w1t.data() + static_cast<std::size_t>(k) * kH;
            for (int j = 0; j < kH; ++j) acc[j] += xv * wt[j];
        }
        double* a1 = w.a1.data() + static_cast<std::size_t>(b) * kH;
        for (int j = 0; j < kH; ++j) a1[j] = std::tanh(acc[j]);

        for (int j = 0; j < kH; ++j) acc[j] = p[net.b2() + j];
        for (int k = 0; k < kH; ++k) {
            const double av = a1[k];
            const double* wt = w.w2t.data() + static_cast<std::size_t>(k) * kH;
            for (int j = 0; j < kH; ++j) acc[j] += av * wt[j];
        }
        double* a2 = w.a2.data() + static_cast<std::size_t>(b) * kH;
        for (int j = 0; j < kH; ++j) a2[j] = std::tanh(acc[j]);

        for (int j = 0; j < kH; ++j) acc[j] = p[net.b3() + j];
        for (int k = 0; k < kH; ++k) {
            const double av = a2[k];
            const double* wt = w.w3t.data() + static_cast<std::size_t>(k) * kH;
            for (int j = 0; j < kH; ++j) acc[j] += av * wt[j];
        }
        double* a3 = w.a3.data() + static_cast<std::size_t>(b) * kH;
        for (int j = 0; j < kH; ++j) a3[j] = std::tanh(acc[j]);

        for (int o = 0; o < Mlp::kOut; ++o) {
            double s = p[net.b4() + o];
            const double* wo = p + net.w4() + static_cast<std::size_t>(o) * kH;
            for (int k = 0; k < kH; ++k) s += wo[k] * a3[k];
            w.out[static_cast<std::size_t>(b) * Mlp::kOut + o] = s;
        }
    }
}

// Backward through the stored activations; writes the mean-loss gradient.
// Returns the mean per-sample loss.
double backward_batch(const Mlp& net, const double* xb, const double* yn,
                      const unsigned char* censored, int batch, LossKind loss, Work& w,
                      std::span<double> grad) {
    const double* p = net.params.data();
    const int d = net.input_dim;
    const double inv_b = 1.0 / static_cast<double>(batch);
    double loss_sum = 0.0;
    for (int b = 0; b < batch; ++b) {
        const double mu = w.out[static_cast<std::size_t>(b) * Mlp::kOut];
        const double raw = w.out[static_cast<std::size_t>(b) * Mlp::kOut + 1];
        // A diverged forward pass must surface as a non-finite loss (and then
        // a TrainingError upstream), not as an argument error from the loss.
        if (!std::isfinite(mu) || !std::isfinite(raw))
            return std::numeric_limits<double>::quiet_NaN();
        const double sigma2 = softplus(raw) + Mlp::kVarFloor;
        const bool c = censored[b] != 0;
        double value;
        LossGrad lg;
        if (loss == LossKind::tobit) {
            value = tobit_nll(yn[b], mu, sigma2, c);
            lg = tobit_grad(yn[b], mu, sigma2, c);
        } else {
            value = gaussian_nll(yn[b], mu, sigma2);
            lg = gaussian_grad(yn[b], mu, sigma2);
        }
        loss_sum += value;
        w.dout[static_cast<std::size_t>(b) * Mlp::kOut] = lg.d_mu * inv_b;
        w.dout[static_cast<std::size_t>(b) * Mlp::kOut + 1] = lg.d_sigma2 * logistic(raw) * inv_b;
    }

    std::fill(grad.begin(), grad.end(), 0.0);
    double* g = grad.data();

    // Output layer.
    for (int b = 0; b < batch; ++b) {
        const double* a3 = w.a3.data() + static_cast<std::size_t>(b) * kH;
        double* da = w.da.data() + static_cast<std::size_t>(b) * kH;
        const double g0 = w.dout[static_cast<std::size_t>(b) * Mlp::kOut];
        const double g1 = w.dout[static_cast<std::size_t>(b) * Mlp::kOut + 1];
        double* gw0 = g + net.w4();
        double* gw1 = gw0 + kH;
        const double* w0 = p + net.w4();
        const double* w1p = w0 + kH;
        for (int k = 0; k < kH; ++k) {
            gw0[k] += g0 * a3[k];
            gw1[k] += g1 * a3[k];
            da[k] = g0 * w0[k] + g1 * w1p[k];
        }
        g[net.b4()] += g0;
        g[net.b4() + 1] += g1;
    }

    // Hidden layers, last to first.
    const struct {
        const std::vector<double>* act_in;   // layer input activations
        const std::vector<double>* act_out;  // layer output activations
        std::size_t woff, boff;
    } layers[2] = {
        {&w.a2, &w.a3, net.w3(), net.b3()},
        {&w.a1, &w.a2, net.w2(), net.b2()},
    };
    for (const auto& L : layers) {
        for (int b = 0; b < batch; ++b) {
            const double* aout = L.act_out->data() + static_cast<std::size_t>(b) * kH;
            const double* ain = L.act_in->data() + static_cast<std::size_t>(b) * kH;
            double* da = w.da.data() + static_cast<std::size_t>(b) * kH;
            double* dz = w.dz.data() + static_cast<std::size_t>(b) * kH;
            for (int j = 0; j < kH; ++j) dz[j] = da[j] * (1.0 - aout[j] * aout[j]);
            std::fill(da, da + kH, 0.0);
            for (int j = 0; j < kH; ++j) {
                const double coef = dz[j];
                double* gw = g + L.woff + static_cast<std::size_t>(j) * kH;
                const double* wr = p + L.woff + static_cast<std::size_t>(j) * kH;
                for (int k = 0; k < kH; ++k) {
                    gw[k] += coef * ain[k];
                    da[k] += coef * wr[k];
                }
                g[L.boff + j] += coef;
            }
        }
    }

    // Input layer.
    for (int b = 0; b < batch; ++b) {
        const double* a1 = w.a1.data() + static_cast<std::size_t>(b) * kH;
        const double* da = w.da.data() + static_cast<std::size_t>(b) * kH;
        const double* x = xb + static_cast<std::size_t>(b) * d;
        for (int j = 0; j < kH; ++j) {
            const double coef = da[j] * (1.0 - a1[j] * a1[j]);
            double* gw = g + net.w1() + static_cast<std::size_t>(j) * d;
            for (int k = 0; k < d; ++k) gw[k] += coef * x[k];
            g[net.b1() + j] += coef;
        }
    }
    return loss_sum * inv_b;
}

}  // namespace

double loss_and_gradient(const Mlp& net, std::span<const double> xn, std::span<const double> yn,
                         std::span<const unsigned char> censored, LossKind loss,
                         std::span<double> grad) {
    const int d = net.input_dim;
    if (d < 1 || net.params.size() != net.param_count())
        throw ArgumentError("loss_and_gradient: uninitialized network");
    if (yn.empty() || xn.size() != yn.size() * static_cast<std::size_t>(d) ||
        censored.size() != yn.size() || grad.size() != net.param_count())
        throw ArgumentError("loss_and_gradient: inconsistent batch shapes");
    Work w;
    w.resize(static_cast<int>(yn.size()), d);
    refresh_transposes(net, w);
    forward_batch(net, xn.data(), static_cast<int>(yn.size()), w);
    return backward_batch(net, xn.data(), yn.data(), censored.data(), static_cast<int>(yn.size()),
                          loss, w, grad);
}

TrainResult train(Mlp net, std::span<const Observation> data, LossKind loss,
                  const Normalizer& norm, const TrainConfig& cfg) {
    g_train_invocations.fetch_add(1, std::memory_order_relaxed);
    validate_observations(data);
    if (net.input_dim != norm.dim() ||
        static_cast<std::size_t>(net.input_dim) != data.front().x.size())
        throw ArgumentError("train: dimension mismatch between net, normalizer and data");
    if (net.params.size() != net.param_count()) throw ArgumentError("train: uninitialized network");
    if (cfg.epochs < 1 || cfg.batch_size < 1) throw ArgumentError("train: epochs and batch_size must be >= 1");
    if (!(cfg.peak_lr > 0.0) || !(cfg.grad_clip > 0.0) || !(cfg.weight_decay >= 0.0) ||
        !(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
        throw ArgumentError("train: invalid optimizer settings");

    const int n = static_cast<int>(data.size());
    const int d = net.input_dim;

    // Canonical order: training is a function of the observation multiset,
    // not of the order the rows arrived in.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const Observation& oa = data[a];
        const Observation& ob = data[b];
        if (oa.x != ob.x) return oa.x < ob.x;
        if (oa.y != ob.y) return oa.y < ob.y;
        if (oa.cutoff != ob.cutoff) return oa.cutoff < ob.cutoff;
        return oa.censored < ob.censored;
    });

    std::vector<double> xn(static_cast<std::size_t>(n) * d);
    std::vector<double> yn(n);
    std::vector<unsigned char> cens(n);
    for (int i = 0; i < n; ++i) {
        const Observation& o = data[order[i]];
        norm.apply_x(o.x, std::span<double>(xn.data() + static_cast<std::size_t>(i) * d, d));
        yn[i] = norm.apply_y(o.y);
        cens[i] = o.censored ? 1 : 0;
    }

    // Variance head starts at the observed spread of the normalized targets
    // (1 when the normalizer was fitted on this data).
    {
        double m = 0.0;
        for (double y : yn) m += y;
        m /= n;
        double v = 0.0;
        for (double y : yn) v += (y - m) * (y - m);
        v /= n;
        net.params[net.b4() + 1] = softplus_inv(std::clamp(v, 1e-3, 1e6));
    }

    const int batch = std::min(cfg.batch_size, n);
    const long long steps_per_epoch = (n + batch - 1) / batch;
    const long long total_steps = steps_per_epoch * cfg.epochs;

    std::vector<double> grad(net.param_count());
    std::vector<double> velocity(net.param_count(), 0.0);
    std::vector<double> xb(static_cast<std::size_t>(batch) * d);
    std::vector<double> yb(batch);
    std::vector<unsigned char> cb(batch);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng shuffle_rng(mix_seed(cfg.seed, kShuffleSalt));

    // Weight regions get weight decay; bias regions do not.
    const struct {
        std::size_t off, len;
        bool decay;
    } regions[8] = {
        {net.w1(), static_cast<std::size_t>(kH) * d, true}, {net.b1(), kH, false},
        {net.w2(), static_cast<std::size_t>(kH) * kH, true}, {net.b2(), kH, false},
        {net.w3(), static_cast<std::size_t>(kH) * kH, true}, {net.b3(), kH, false},
        {net.w4(), static_cast<std::size_t>(Mlp::kOut) * kH, true}, {net.b4(), Mlp::kOut, false},
    };

    Work work;
    work.resize(batch, d);
    TrainResult result;
    result.epoch_loss.reserve(cfg.epochs);

    long long step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(perm);
        double epoch_sum = 0.0;
        for (int start = 0; start < n; start += batch) {
            const int bsz = std::min(batch, n - start);
            for (int b = 0; b < bsz; ++b) {
                const int src = perm[start + b];
                std::memcpy(xb.data() + static_cast<std::size_t>(b) * d,
                            xn.data() + static_cast<std::size_t>(src) * d, sizeof(double) * d);
                yb[b] = yn[src];
                cb[b] = cens[src];
            }
            refresh_transposes(net, work);
            forward_batch(net, xb.data(), bsz, work);
            const double batch_loss =
                backward_batch(net, xb.data(), yb.data(), cb.data(), bsz, loss, work, grad);

            bool finite = std::isfinite(batch_loss);
            for (std::size_t i = 0; finite && i < grad.size(); ++i) finite = std::isfinite(grad[i]);
            if (!finite)
                throw TrainingError("train: non-finite loss or gradient at step " + std::to_string(step), step);

            const double lr = one_cycle_lr(step, total_steps, cfg.peak_lr);
            const double clip = cfg.grad_clip;
            for (const auto& r : regions) {
                double* pp = net.params.data() + r.off;
                double* vv = velocity.data() + r.off;
                const double* gg = grad.data() + r.off;
                const double wd = r.decay ? cfg.weight_decay : 0.0;
                for (std::size_t i = 0; i < r.len; ++i) {
                    const double gc = std::clamp(gg[i], -clip, clip) + wd * pp[i];
                    vv[i] = cfg.momentum * vv[i] + gc;
                    pp[i] -= lr * vv[i];
                }
            }
            epoch_sum += batch_loss * bsz;
            ++step;
        }
        for (double p : net.params) {
            if (!std::isfinite(p))
                throw TrainingError("train: non-finite parameter after step " + std::to_string(step - 1), step - 1);
        }
        result.epoch_loss.push_back(epoch_sum / n);
    }
    result.net = std::move(net);
    return result;
}

std::uint64_t train_invocation_count() {
    return g_train_invocations.load(std::memory_order_relaxed);
}

}  // namespace cbo
