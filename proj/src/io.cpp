#include "cascade/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cascade {

namespace {
using nlohmann::json;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool to_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool to_int(const std::string& s, long long& out) {
    try {
        std::size_t pos = 0;
        out = std::stoll(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}
}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

std::string series_to_csv(const CorrelatorSeries& s) {
    std::ostringstream os;
    os << "t,E_re,E_im,P,P_sem,G2,G2_sem,g2,g2_lo,g2_hi,S2,S2_sem,beyond_tlimit\n";
    for (std::size_t k = 0; k < s.size(); ++k) {
        os << format_double(s.t[k]) << ',' << format_double(s.E[k].real()) << ','
           << format_double(s.E[k].imag()) << ',' << format_double(s.P[k]) << ','
           << format_double(s.sem_P[k]) << ',' << format_double(s.G2[k]) << ','
           << format_double(s.sem_G2[k]) << ',' << format_double(s.g2[k]) << ','
           << format_double(s.g2_lo[k]) << ',' << format_double(s.g2_hi[k]) << ','
           << format_double(s.S2[k]) << ',' << format_double(s.sem_S2[k]) << ','
           << (s.beyond_limit[k] ? 1 : 0) << '\n';
    }
    return os.str();
}

namespace {
json series_json_object(const CorrelatorSeries& s) {
    json cols;
    auto put = [&](const char* name, const std::vector<double>& v) {
        cols[name] = v;
    };
    put("t", s.t);
    std::vector<double> e_re(s.size()), e_im(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        e_re[k] = s.E[k].real();
        e_im[k] = s.E[k].imag();
    }
    put("E_re", e_re);
    put("E_im", e_im);
    put("P", s.P);
    put("P_sem", s.sem_P);
    put("G2", s.G2);
    put("G2_sem", s.sem_G2);
    put("g2", s.g2);
    put("g2_lo", s.g2_lo);
    put("g2_hi", s.g2_hi);
    put("S2", s.S2);
    put("S2_sem", s.sem_S2);
    std::vector<int> beyond(s.size()), unb(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        beyond[k] = s.beyond_limit[k] ? 1 : 0;
        unb[k] = s.g2_unbounded[k] ? 1 : 0;
    }
    cols["beyond_tlimit"] = beyond;
    cols["g2_unbounded"] = unb;
    cols["t_limit"] = s.t_limit;
    return cols;
}
}  // namespace

std::string series_to_json(const CorrelatorSeries& s) {
    return series_json_object(s).dump(2) + "\n";
}

std::string sidecar_json(const RunConfig& cfg, const RunResult& result) {
    json j;
    j["mode"] = cfg.mode;
    json c;
    c["n_atoms"] = cfg.params.n_atoms;
    c["beta"] = cfg.params.beta;
    c["init"] = cfg.init_kind;
    if (cfg.init_kind == "pulse_area") c["pulse_area"] = cfg.pulse_area;
    if (!cfg.init.bloch.empty()) {
        c["bloch_u"] = cfg.init.bloch[0].u;
        c["bloch_v"] = cfg.init.bloch[0].v;
        c["bloch_w"] = cfg.init.bloch[0].w;
    }
    c["dt"] = cfg.params.dt;
    c["t_end"] = cfg.params.t_end;
    c["output_stride"] = cfg.params.output_stride;
    c["trajectories"] = cfg.params.n_trajectories;
    c["theta_min"] = cfg.params.theta_min;
    c["bootstrap_resamples"] = cfg.bootstrap_resamples;
    c["format"] = cfg.format;
    if (!cfg.params.drive.segments.empty()) {
        json segs = json::array();
        for (const auto& seg : cfg.params.drive.segments)
            segs.push_back({{"t_start", seg.t_start},
                            {"t_stop", seg.t_stop},
                            {"alpha_re", seg.alpha.real()},
                            {"alpha_im", seg.alpha.imag()}});
        c["drive"] = segs;
    }
    j["config"] = c;
    j["seed"] = cfg.params.seed;
    j["trajectories_run"] = result.n_trajectories;
    j["t_limit"] = result.series.t_limit;
    j["wall_seconds"] = result.wall_seconds;
    j["warnings"] = result.warnings;
    return j.dump(2) + "\n";
}

ConfigParseResult parse_config_text(const std::string& text) {
    ConfigParseResult res;
    RunConfig& cfg = res.config;
    double bloch_u = 0.0, bloch_v = 0.0, bloch_w = 1.0;
    std::vector<double> beta_list;
    std::string drive_spec;

    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string stripped = line;
        std::size_t hash = stripped.find('#');
        if (hash != std::string::npos) stripped = stripped.substr(0, hash);
        stripped = trim(stripped);
        if (stripped.empty()) continue;
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            res.error = "line " + std::to_string(line_no) + ": expected key=value";
            return res;
        }
        std::string key = trim(stripped.substr(0, eq));
        std::string val = trim(stripped.substr(eq + 1));
        auto bad = [&](const std::string& why) {
            res.error = "key '" + key + "': " + why;
        };

        if (key == "mode") {
            cfg.mode = val;
        } else if (key == "n_atoms") {
            long long v;
            if (!to_int(val, v) || v < 1) { bad("positive integer required"); return res; }
            cfg.params.n_atoms = static_cast<int>(v);
        } else if (key == "beta") {
            beta_list.clear();
            for (const auto& tok : split(val, ',')) {
                double b;
                if (!to_double(trim(tok), b)) { bad("number list required"); return res; }
                beta_list.push_back(b);
            }
        } else if (key == "init") {
            cfg.init_kind = val;
        } else if (key == "pulse_area") {
            if (!to_double(val, cfg.pulse_area)) { bad("number required"); return res; }
        } else if (key == "bloch_u") {
            if (!to_double(val, bloch_u)) { bad("number required"); return res; }
        } else if (key == "bloch_v") {
            if (!to_double(val, bloch_v)) { bad("number required"); return res; }
        } else if (key == "bloch_w") {
            if (!to_double(val, bloch_w)) { bad("number required"); return res; }
        } else if (key == "dt") {
            if (!to_double(val, cfg.params.dt)) { bad("number required"); return res; }
        } else if (key == "t_end") {
            if (!to_double(val, cfg.params.t_end)) { bad("number required"); return res; }
        } else if (key == "output_stride") {
            long long v;
            if (!to_int(val, v) || v < 1) { bad("positive integer required"); return res; }
            cfg.params.output_stride = static_cast<int>(v);
        } else if (key == "trajectories") {
            long long v;
            if (!to_int(val, v) || v < 2) { bad("integer >= 2 required"); return res; }
            cfg.params.n_trajectories = static_cast<std::uint64_t>(v);
        } else if (key == "seed") {
            long long v;
            if (!to_int(val, v) || v < 0) { bad("non-negative integer required"); return res; }
            cfg.params.seed = static_cast<std::uint64_t>(v);
        } else if (key == "theta_min") {
            if (!to_double(val, cfg.params.theta_min)) { bad("number required"); return res; }
        } else if (key == "drive") {
            drive_spec = val;
        } else if (key == "out") {
            cfg.out_path = val;
        } else if (key == "format") {
            cfg.format = val;
        } else if (key == "workers") {
            long long v;
            if (!to_int(val, v) || v < 0) { bad("non-negative integer required"); return res; }
            cfg.workers = static_cast<int>(v);
        } else if (key == "bootstrap_resamples") {
            long long v;
            if (!to_int(val, v) || v < 10) { bad("integer >= 10 required"); return res; }
            cfg.bootstrap_resamples = static_cast<int>(v);
        } else if (key == "oracle_dt") {
            if (!to_double(val, cfg.oracle_dt)) { bad("number required"); return res; }
        } else {
            res.error = "unknown key '" + key + "'";
            return res;
        }
    }

    // Resolve derived fields.
    if (cfg.mode != "simulate" && cfg.mode != "oracle" && cfg.mode != "dicke" &&
        cfg.mode != "compare" && cfg.mode != "sample-check") {
        res.error = "unknown mode '" + cfg.mode + "'";
        return res;
    }
    if (cfg.format != "csv" && cfg.format != "json") {
        res.error = "format must be csv or json";
        return res;
    }
    const int n = cfg.params.n_atoms;
    if (beta_list.empty()) beta_list.push_back(1.0);
    if (beta_list.size() == 1)
        cfg.params.beta.assign(static_cast<std::size_t>(n), beta_list[0]);
    else if (beta_list.size() == static_cast<std::size_t>(n))
        cfg.params.beta = beta_list;
    else {
        res.error = "beta list length must be 1 or n_atoms";
        return res;
    }
    if (!drive_spec.empty()) {
        for (const auto& seg_tok : split(drive_spec, ';')) {
            auto fields = split(seg_tok, ',');
            if (fields.size() != 4) {
                res.error = "drive segments need re,im,t_start,t_stop";
                return res;
            }
            double re, im_v, t0, t1;
            if (!to_double(trim(fields[0]), re) || !to_double(trim(fields[1]), im_v) ||
                !to_double(trim(fields[2]), t0) || !to_double(trim(fields[3]), t1)) {
                res.error = "drive segments need numeric fields";
                return res;
            }
            cfg.params.drive.segments.push_back({t0, t1, complexd(re, im_v)});
        }
    }
    if (cfg.init_kind == "inverted") {
        cfg.init = InitialState::inverted(n);
    } else if (cfg.init_kind == "ground") {
        cfg.init = InitialState::ground(n);
    } else if (cfg.init_kind == "pulse_area") {
        cfg.init = InitialState::uniform(n, bloch_from_pulse_area(cfg.pulse_area));
    } else if (cfg.init_kind == "bloch") {
        cfg.init = InitialState::uniform(n, {bloch_u, bloch_v, bloch_w});
    } else {
        res.error = "init must be inverted|ground|pulse_area|bloch";
        return res;
    }
    return res;
}

ConfigParseResult parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        ConfigParseResult res;
        res.error = "cannot open config file '" + path + "'";
        return res;
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace cascade
