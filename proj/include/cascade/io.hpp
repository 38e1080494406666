#pragma once

#include <optional>
#include <string>

#include "cascade/engine.hpp"
#include "cascade/model.hpp"

namespace cascade {

// One resolved invocation: mode plus the full physics/runtime description.
struct RunConfig {
    std::string mode = "simulate";  // simulate | oracle | dicke | compare | sample-check
    SystemParams params;
    InitialState init;
    std::string init_kind = "inverted";  // inverted | ground | pulse_area | bloch
    double pulse_area = 0.0;
    std::string out_path;           // empty = stdout
    std::string format = "csv";     // csv | json
    int workers = 0;                // 0 = env/default
    int bootstrap_resamples = 1000;
    double oracle_dt = 1e-3;
};

// Parses a flat key=value config file ('#' comments, blank lines ignored).
// Returns an error message naming the offending key/line on failure.
struct ConfigParseResult {
    RunConfig config;
    std::optional<std::string> error;
};
ConfigParseResult parse_config_file(const std::string& path);
ConfigParseResult parse_config_text(const std::string& text);

// Series tables, 9 significant digits. Columns:
// t,E_re,E_im,P,P_sem,G2,G2_sem,g2,g2_lo,g2_hi,S2,S2_sem,beyond_tlimit
std::string series_to_csv(const CorrelatorSeries& s);
std::string series_to_json(const CorrelatorSeries& s);

// Run metadata written next to the table: config echo, seed, t_limit,
// trajectory count, wall time, warnings.
std::string sidecar_json(const RunConfig& cfg, const RunResult& result);

std::string format_double(double x);  // %.9g, used by every writer

}  // namespace cascade
