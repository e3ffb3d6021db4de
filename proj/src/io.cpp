#include "stablecones/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace stablecones {

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw std::invalid_argument("row width does not match header");
        for (std::size_t c = 0; c < row.size(); ++c)
            out << format_full(row[c]) << (c + 1 < row.size() ? "," : "\n");
    }
}

nlohmann::ordered_json to_json(const CheckRecord& rec) {
    nlohmann::ordered_json j;
    j["check_name"] = rec.check_name;
    j["paper_anchor"] = rec.paper_anchor;
    j["value"] = rec.value;
    j["tolerance"] = rec.tolerance;
    j["pass"] = rec.pass;
    return j;
}

void write_summary(const std::string& path, const std::vector<CheckRecord>& checks,
                   const nlohmann::ordered_json& config_echo) {
    nlohmann::ordered_json j;
    j["checks"] = nlohmann::ordered_json::array();
    bool all = true;
    for (const auto& c : checks) {
        j["checks"].push_back(to_json(c));
        all = all && c.pass;
    }
    j["all_pass"] = all;
    j["config"] = config_echo;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

} // namespace stablecones
