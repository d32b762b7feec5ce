#include "geoaux/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace geoaux {

void OptimState::validate() const {
    if (momentum < 0.0 || momentum >= 1.0)
        throw std::invalid_argument("OptimState: momentum must be in [0, 1)");
    if (gamma <= 0.0 || gamma > 1.0)
        throw std::invalid_argument("OptimState: gamma must be in (0, 1]");
    if (decay_period <= 0) throw std::invalid_argument("OptimState: decay period must be positive");
    if (base_lr <= 0.0) throw std::invalid_argument("OptimState: base lr must be positive");
}

double lr_at_epoch(const OptimState& state, int epoch) {
    if (epoch < 0) throw std::invalid_argument("lr_at_epoch: negative epoch");
    return state.base_lr * std::pow(state.gamma, epoch / state.decay_period);
}

void sgd_step(ParamSet& params, const ParamSet& grads, OptimState& state) {
    const double lr = lr_at_epoch(state, state.epoch);
    for (const auto& [name, g] : grads) {
        auto pit = params.find(name);
        if (pit == params.end())
            throw std::invalid_argument("sgd_step: gradient for unknown parameter '" + name + "'");
        Array& p = pit->second;
        if (!p.same_shape(g))
            throw std::invalid_argument("sgd_step: '" + name + "' shape " + p.shape_str() +
                                        " vs gradient " + g.shape_str());
        auto [vit, fresh] = state.velocity.try_emplace(name, Array(p.rows, p.cols));
        Array& v = vit->second;
        if (!fresh && !v.same_shape(p))
            throw std::invalid_argument("sgd_step: stale velocity shape for '" + name + "'");
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            v.data[i] = state.momentum * v.data[i] - lr * g.data[i];
            p.data[i] += v.data[i];
        }
    }
}

}  // namespace geoaux
