#include "geoaux/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace geoaux {

namespace {
constexpr const char* kSchema = "geoaux.checkpoint.v1";
}

void save_checkpoint(const ParamSet& params, const std::string& path) {
    nlohmann::json doc;
    doc["schema"] = kSchema;
    nlohmann::json& out = doc["params"] = nlohmann::json::object();
    for (const auto& [name, a] : params) {
        out[name] = {{"shape", {a.rows, a.cols}}, {"data", a.data}};
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
    f << doc.dump() << "\n";
    if (!f) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

ParamSet load_checkpoint(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
    nlohmann::json doc;
    try {
        f >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_checkpoint: " + path + ": " + e.what());
    }
    if (doc.value("schema", "") != kSchema)
        throw std::runtime_error("load_checkpoint: " + path + ": unknown schema");
    ParamSet params;
    for (const auto& [name, entry] : doc.at("params").items()) {
        const auto& shape = entry.at("shape");
        if (shape.size() != 2)
            throw std::runtime_error("load_checkpoint: '" + name + "' is not 2-D");
        Array a(shape[0].get<int>(), shape[1].get<int>());
        const auto& data = entry.at("data");
        if (data.size() != a.data.size())
            throw std::runtime_error("load_checkpoint: '" + name + "' data length mismatch");
        a.data = data.get<std::vector<double>>();
        params.emplace(name, std::move(a));
    }
    return params;
}

void write_history_csv(const std::vector<HistoryRow>& history, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_history_csv: cannot open " + path);
    f << "epoch,lr,task_loss,reg_loss,total\n";
    char buf[256];
    for (const HistoryRow& r : history) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.lr, r.task_loss,
                      r.reg_loss, r.total);
        f << buf;
    }
    if (!f) throw std::runtime_error("write_history_csv: write failed for " + path);
}

}  // namespace geoaux
