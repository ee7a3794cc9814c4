#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "atucker/errors.hpp"
#include "atucker/sthosvd.hpp"
#include "atucker/tensor_io.hpp"

namespace atucker {

// .tucker: a directory holding core.dten, factor_1.dten .. factor_N.dten
// (factors as order-2 .dten) and meta.json with dims, ranks, the strategy
// name and the per-mode reports.

inline nlohmann::json mode_report_to_json(const ModeReport& r) {
    return {{"mode", r.mode + 1},  // 1-based in files, matching factor_<n>.dten
            {"solver", to_string(r.solver_used)},
            {"selector_decision_time_s", r.selector_decision_time},
            {"solver_time_s", r.solver_time},
            {"predicted_cost_eig", r.predicted_cost_eig},
            {"predicted_cost_als", r.predicted_cost_als},
            {"dims_before", r.dims_before},
            {"dims_after", r.dims_after}};
}

inline void save_tucker(const std::string& dir, const TuckerDecomposition& t,
                        const std::vector<ModeReport>& reports, const std::string& strategy_name,
                        std::uint64_t seed) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoFailure("cannot create directory " + dir + ": " + ec.message());

    write_dten(dir + "/core.dten", t.core);
    std::vector<std::size_t> ranks;
    for (std::size_t n = 0; n < t.factors.size(); ++n) {
        write_dten(dir + "/factor_" + std::to_string(n + 1) + ".dten", t.factors[n]);
        ranks.push_back(t.factors[n].cols());
    }

    nlohmann::json meta;
    meta["schema_version"] = 1;
    meta["original_dims"] = t.original_dims;
    meta["ranks"] = ranks;
    meta["strategy"] = strategy_name;
    meta["seed"] = seed;
    nlohmann::json jr = nlohmann::json::array();
    for (const ModeReport& r : reports) jr.push_back(mode_report_to_json(r));
    meta["reports"] = std::move(jr);

    std::ofstream out(dir + "/meta.json", std::ios::binary);
    if (!out) throw IoFailure("cannot open " + dir + "/meta.json for writing");
    out << meta.dump(2) << '\n';
    if (!out) throw IoFailure("failed writing " + dir + "/meta.json");
}

inline TuckerDecomposition load_tucker(const std::string& dir) {
    if (!std::filesystem::is_directory(dir))
        throw IoFailure(dir + " is not a .tucker directory");
    TuckerDecomposition t;
    t.core = read_dten(dir + "/core.dten");
    for (std::size_t n = 0; n < t.core.order(); ++n) {
        t.factors.push_back(read_dten_matrix(dir + "/factor_" + std::to_string(n + 1) + ".dten"));
        t.original_dims.push_back(t.factors.back().rows());
        if (t.factors.back().cols() != t.core.dim(n))
            throw IoFailure(dir + ": factor " + std::to_string(n + 1) +
                            " does not match the core dimensions");
    }
    return t;
}

}  // namespace atucker
