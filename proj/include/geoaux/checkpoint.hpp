#pragma once

#include <string>
#include <vector>

#include "geoaux/optim.hpp"

namespace geoaux {

// JSON checkpoint, schema "geoaux.checkpoint.v1": parameter name -> shape +
// row-major data. Doubles round-trip exactly.
void save_checkpoint(const ParamSet& params, const std::string& path);
ParamSet load_checkpoint(const std::string& path);

struct HistoryRow {
    int epoch = 0;
    double lr = 0.0;
    double task_loss = 0.0;
    double reg_loss = 0.0;
    double total = 0.0;
};

// CSV with header "epoch,lr,task_loss,reg_loss,total".
void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path);

}  // namespace geoaux
