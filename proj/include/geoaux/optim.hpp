#pragma once

#include <map>
#include <string>

#include "geoaux/array.hpp"

namespace geoaux {

// Named parameters. std::map keeps iteration order stable across runs.
using ParamSet = std::map<std::string, Array>;

struct OptimState {
    double base_lr = 0.01;
    double momentum = 0.9;
    double gamma = 0.5;
    int decay_period = 20;
    int epoch = 0;
    ParamSet velocity;

    void validate() const;
};

// base * gamma^floor(epoch / period)
double lr_at_epoch(const OptimState& state, int epoch);

// Classical momentum: v <- mu*v - lr*g; p <- p + v. Only parameters present
// in `grads` move; velocities are created on first use. lr comes from the
// state's schedule at state.epoch.
void sgd_step(ParamSet& params, const ParamSet& grads, OptimState& state);

}  // namespace geoaux
