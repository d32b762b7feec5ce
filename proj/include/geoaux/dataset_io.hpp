#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoaux/geomprops.hpp"
#include "geoaux/pointcloud.hpp"

namespace geoaux {

// One labeled cloud: jittered points plus two geometric label sets.
// `geossl` is compute_props on the stored points; `geopl` comes from the
// clean surface (analytic, or transferred from a dense sample).
struct CloudEntry {
    PointCloud cloud;
    GeomProps geossl;
    GeomProps geopl;
    std::uint64_t seed = 0;
};

struct Dataset {
    std::string split;                             // "train" or "test"
    std::vector<std::string> classes;
    std::vector<std::vector<int>> category_parts;  // global part ids per class
    int points_per_cloud = 0;
    std::uint64_t seed = 0;
    std::vector<CloudEntry> clouds;

    int num_classes() const { return static_cast<int>(classes.size()); }
    int num_parts() const;
    void validate() const;
};

nlohmann::json dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const nlohmann::json& j);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file(const std::string& path);

}  // namespace geoaux
