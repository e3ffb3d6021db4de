#ifndef STABLECONES_IO_HPP
#define STABLECONES_IO_HPP

#include <json.hpp>

#include <string>
#include <vector>

namespace stablecones {

/// Full-precision decimal rendering (17 significant digits), locale-free.
std::string format_full(double v);

/// CSV with a header row, comma separation, full precision. Rows must all
/// have the columns' size.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

/// One verdict of an identity check, serialized into the run summary.
struct CheckRecord {
    std::string check_name;
    std::string paper_anchor;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

nlohmann::ordered_json to_json(const CheckRecord& rec);

/// Writes {"checks": [...], "config": ...} with stable key order; byte
/// identical across reruns of the same config and seed.
void write_summary(const std::string& path, const std::vector<CheckRecord>& checks,
                   const nlohmann::ordered_json& config_echo);

} // namespace stablecones

#endif
