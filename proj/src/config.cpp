#include "roughmill/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "roughmill/errors.hpp"

namespace roughmill {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("bad numeric value for " + key + ": '" + v + "'");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        long long x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("bad integer value for " + key + ": '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        unsigned long long x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("bad unsigned value for " + key + ": '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw config_error("bad boolean value for " + key + ": '" + v + "'");
}

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Config parse_config_text(const std::string& text) {
    Config c;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> keys = {
        {"model.n_modes", [&](const std::string& k, const std::string& v) { c.model.n_modes = static_cast<int>(parse_int(k, v)); }},
        {"model.d1", [&](const std::string& k, const std::string& v) { c.model.d1 = static_cast<int>(parse_int(k, v)); }},
        {"model.d2", [&](const std::string& k, const std::string& v) { c.model.d2 = static_cast<int>(parse_int(k, v)); }},
        {"model.L_F2", [&](const std::string& k, const std::string& v) { c.model.L_F2 = parse_double(k, v); }},
        {"model.L_G2", [&](const std::string& k, const std::string& v) { c.model.L_G2 = parse_double(k, v); }},
        {"model.a_scale", [&](const std::string& k, const std::string& v) { c.model.a_scale = parse_double(k, v); }},
        {"model.b_scale", [&](const std::string& k, const std::string& v) { c.model.b_scale = parse_double(k, v); }},
        {"model.g_scale", [&](const std::string& k, const std::string& v) { c.model.g_scale = parse_double(k, v); }},
        {"model.c_level", [&](const std::string& k, const std::string& v) { c.model.c_level = parse_double(k, v); }},
        {"model.y_independent_f1", [&](const std::string& k, const std::string& v) { c.model.y_independent_f1 = parse_bool(k, v); }},
        {"solver.alpha", [&](const std::string& k, const std::string& v) { c.solver.alpha = parse_double(k, v); }},
        {"solver.alpha0", [&](const std::string& k, const std::string& v) { c.solver.alpha0 = parse_double(k, v); }},
        {"solver.gamma", [&](const std::string& k, const std::string& v) { c.solver.gamma = parse_double(k, v); }},
        {"solver.sigma", [&](const std::string& k, const std::string& v) { c.solver.sigma = parse_double(k, v); }},
        {"solver.theta", [&](const std::string& k, const std::string& v) { c.solver.theta = parse_double(k, v); }},
        {"solver.zeta", [&](const std::string& k, const std::string& v) { c.solver.zeta = parse_double(k, v); }},
        {"solver.epsilon", [&](const std::string& k, const std::string& v) { c.solver.epsilon = parse_double(k, v); }},
        {"solver.delta", [&](const std::string& k, const std::string& v) { c.solver.delta = parse_double(k, v); }},
        {"solver.T", [&](const std::string& k, const std::string& v) { c.solver.T = parse_double(k, v); }},
        {"solver.macro_steps", [&](const std::string& k, const std::string& v) { c.solver.macro_steps = static_cast<int>(parse_int(k, v)); }},
        {"solver.micro_substeps", [&](const std::string& k, const std::string& v) { c.solver.micro_substeps = static_cast<int>(parse_int(k, v)); }},
        {"solver.area_substeps", [&](const std::string& k, const std::string& v) { c.solver.area_substeps = static_cast<int>(parse_int(k, v)); }},
        {"solver.master_seed", [&](const std::string& k, const std::string& v) { c.solver.master_seed = parse_u64(k, v); }},
        {"solver.replica_id", [&](const std::string& k, const std::string& v) { c.solver.replica_id = parse_u64(k, v); }},
        {"experiment.replicas", [&](const std::string& k, const std::string& v) { c.experiment.replicas = static_cast<int>(parse_int(k, v)); }},
        {"experiment.threads", [&](const std::string& k, const std::string& v) { c.experiment.threads = static_cast<int>(parse_int(k, v)); }},
    };

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) + " is not key = value: '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        auto it = keys.find(key);
        if (it == keys.end())
            throw config_error("unknown config key: " + key);
        it->second(key, val);
    }

    if (c.model.n_modes < 1) throw config_error("model.n_modes must be >= 1");
    if (c.model.d1 < 1 || c.model.d2 < 1)
        throw config_error("model.d1 and model.d2 must be >= 1");
    if (c.experiment.replicas < 1) throw config_error("experiment.replicas must be >= 1");
    if (c.experiment.threads < 1) throw config_error("experiment.threads must be >= 1");

    validate_solver_config(c.solver);
    check_model(make_operator(c), make_model(make_operator(c), c));
    return c;
}

Config parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string emit_config(const Config& c) {
    std::ostringstream out;
    out << "model.n_modes = " << c.model.n_modes << "\n";
    out << "model.d1 = " << c.model.d1 << "\n";
    out << "model.d2 = " << c.model.d2 << "\n";
    out << "model.L_F2 = " << fmt_full(c.model.L_F2) << "\n";
    out << "model.L_G2 = " << fmt_full(c.model.L_G2) << "\n";
    out << "model.a_scale = " << fmt_full(c.model.a_scale) << "\n";
    out << "model.b_scale = " << fmt_full(c.model.b_scale) << "\n";
    out << "model.g_scale = " << fmt_full(c.model.g_scale) << "\n";
    out << "model.c_level = " << fmt_full(c.model.c_level) << "\n";
    out << "model.y_independent_f1 = " << (c.model.y_independent_f1 ? "true" : "false") << "\n";
    out << "solver.alpha = " << fmt_full(c.solver.alpha) << "\n";
    out << "solver.alpha0 = " << fmt_full(c.solver.alpha0) << "\n";
    out << "solver.gamma = " << fmt_full(c.solver.gamma) << "\n";
    out << "solver.sigma = " << fmt_full(c.solver.sigma) << "\n";
    out << "solver.theta = " << fmt_full(c.solver.theta) << "\n";
    out << "solver.zeta = " << fmt_full(c.solver.zeta) << "\n";
    out << "solver.epsilon = " << fmt_full(c.solver.epsilon) << "\n";
    out << "solver.delta = " << fmt_full(c.solver.delta) << "\n";
    out << "solver.T = " << fmt_full(c.solver.T) << "\n";
    out << "solver.macro_steps = " << c.solver.macro_steps << "\n";
    out << "solver.micro_substeps = " << c.solver.micro_substeps << "\n";
    out << "solver.area_substeps = " << c.solver.area_substeps << "\n";
    out << "solver.master_seed = " << c.solver.master_seed << "\n";
    out << "solver.replica_id = " << c.solver.replica_id << "\n";
    out << "experiment.replicas = " << c.experiment.replicas << "\n";
    out << "experiment.threads = " << c.experiment.threads << "\n";
    return out.str();
}

SpectralOperator make_operator(const Config& c) {
    return dirichlet_laplacian(c.model.n_modes);
}

ModelSpec make_model(const SpectralOperator& op, const Config& c) {
    return make_default_model(op, c.model);
}

} // namespace roughmill
