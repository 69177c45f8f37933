#include "ensemble.hpp"

#include <cmath>

#include "parallel.hpp"

namespace cbo {

PredictiveHead Ensemble::predict(std::span<const double> x) const {
    if (members.empty()) throw ArgumentError("ensemble: no members");
    const std::vector<double> xn = norm.apply_x(x);
    std::vector<double> mus(members.size());
    for (std::size_t m = 0; m < members.size(); ++m)
        mus[m] = norm.invert_y(members[m].forward(xn).mu);
    double mean = 0.0;
    for (double v : mus) mean += v;
    mean /= static_cast<double>(mus.size());
    double var = 0.0;
    for (double v : mus) var += (v - mean) * (v - mean);
    var /= static_cast<double>(mus.size());
    return {mean, var};
}

PredictiveHead Ensemble::predict_member(int member, std::span<const double> x) const {
    if (member < 0 || member >= size()) throw ArgumentError("ensemble: member index out of range");
    const std::vector<double> xn = norm.apply_x(x);
    const PredictiveHead h = members[static_cast<std::size_t>(member)].forward(xn);
    return {norm.invert_y(h.mu), h.sigma2 * norm.y_std * norm.y_std};
}

Ensemble train_ensemble(std::span<const Observation> data, int ensemble_size,
                        const TrainConfig& cfg, std::uint64_t base_seed, LossKind loss, int jobs,
                        std::optional<Normalizer> norm) {
    if (ensemble_size < 1) throw ArgumentError("train_ensemble: ensemble_size must be >= 1");
    validate_observations(data);
    Ensemble ens;
    ens.loss = loss;
    ens.norm = norm ? std::move(*norm) : fit_normalizer(data);
    ens.members.resize(ensemble_size);
    const int dim = static_cast<int>(data.front().x.size());
    parallel_for(ensemble_size, jobs, [&](int m) {
        TrainConfig member_cfg = cfg;
        member_cfg.seed = base_seed + static_cast<std::uint64_t>(m);
        Mlp net = init_mlp(dim, member_cfg.seed);
        ens.members[m] = train(std::move(net), data, loss, ens.norm, member_cfg).net;
    });
    return ens;
}

}  // namespace cbo
