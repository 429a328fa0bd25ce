#include "perfou/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "perfou/errors.hpp"

namespace perfou {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + where + key + "'");
    }
}

template <class T>
T get_as(const json& obj, const std::string& key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for '" + where + key + "': " + e.what());
    }
}

std::size_t get_count(const json& obj, const std::string& key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ConfigError("'" + where + key + "' must be a nonnegative integer");
    }
    return v.get<std::size_t>();
}

EstimatorMode parse_mode(const std::string& s) {
    if (s == "naive" || s == "naive_pathwise") return EstimatorMode::naive_pathwise;
    if (s == "oracle" || s == "oracle_divergence") return EstimatorMode::oracle_divergence;
    throw ConfigError("unknown estimator mode '" + s + "'");
}

CorrectionAlpha parse_correction(const std::string& s) {
    if (s == "true_alpha") return CorrectionAlpha::true_alpha;
    if (s == "plugin") return CorrectionAlpha::plugin;
    throw ConfigError("unknown correction '" + s + "'");
}

TraceRule parse_trace(const std::string& s) {
    if (s == "discrete_exact") return TraceRule::discrete_exact;
    if (s == "continuous") return TraceRule::continuous;
    throw ConfigError("unknown trace rule '" + s + "'");
}

BasisFunction parse_basis(const json& entry) {
    reject_unknown(entry, {"kind", "k"}, "basis[].");
    const auto kind = get_as<std::string>(entry, "kind", "basis[].");
    const int k = entry.contains("k") ? get_as<int>(entry, "k", "basis[].") : 0;
    if (kind == "const") {
        if (k != 0) throw ConfigError("constant basis takes k = 0");
        return constant_basis();
    }
    if (k < 1) throw ConfigError("trigonometric basis needs k >= 1");
    if (kind == "sin") return sine_basis(k);
    if (kind == "cos") return cosine_basis(k);
    throw ConfigError("unknown basis kind '" + kind + "'");
}

}  // namespace

SimulationOptions AppConfig::simulation_options() const {
    return SimulationOptions{.n_periods = n_periods,
                             .steps_per_period = step_denominator,
                             .seed = seed,
                             .stationary_start = stationary_start,
                             .burn_in_periods = burn_in_periods};
}

McConfig AppConfig::mc_config() const {
    McConfig c;
    c.model = model;
    c.n_list = mc.n_list;
    c.replicates = mc.replicates;
    c.steps_per_period = step_denominator;
    c.mode = mc.mode;
    c.correction = mc.correction;
    c.trace = mc.trace;
    c.master_seed = mc.master_seed;
    c.workers = workers;
    c.stationary_start = true;
    c.burn_in_periods = burn_in_periods;
    return c;
}

CouplingConfig AppConfig::coupling_config() const {
    return CouplingConfig{.model = model,
                          .n_periods = n_periods,
                          .steps_per_period = step_denominator,
                          .seed = seed,
                          .burn_in_periods = burn_in_periods};
}

std::size_t AppConfig::burn_in_steps() const {
    if (!stationary_start) return 0;
    return burn_in_periods.value_or(default_burn_in_periods(model.alpha)) * step_denominator;
}

AppConfig config_from_json(const json& doc) {
    reject_unknown(doc,
                   {"hurst", "alpha", "mu", "sigma", "basis", "xi0", "step_denominator", "n_periods",
                    "seed", "stationary_start", "burn_in_periods", "workers", "estimate", "mc"},
                   "");
    AppConfig cfg;
    try {
        if (doc.contains("hurst")) cfg.model.hurst = HurstExponent(get_as<double>(doc, "hurst", ""));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("inadmissible hurst: ") + e.what());
    }
    if (doc.contains("alpha")) cfg.model.alpha = get_as<double>(doc, "alpha", "");
    if (doc.contains("mu")) cfg.model.mu = get_as<std::vector<double>>(doc, "mu", "");
    if (doc.contains("sigma")) cfg.model.sigma = get_as<double>(doc, "sigma", "");
    if (doc.contains("xi0")) cfg.model.xi0 = get_as<double>(doc, "xi0", "");
    if (doc.contains("basis")) {
        const json& list = doc.at("basis");
        if (!list.is_array()) throw ConfigError("'basis' must be an array");
        std::vector<BasisFunction> functions;
        for (const auto& entry : list) functions.push_back(parse_basis(entry));
        try {
            cfg.model.basis = BasisSet(std::move(functions));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("non-orthonormal basis request: ") + e.what());
        }
    }
    if (doc.contains("step_denominator")) cfg.step_denominator = get_count(doc, "step_denominator", "");
    if (doc.contains("n_periods")) cfg.n_periods = get_count(doc, "n_periods", "");
    if (doc.contains("seed")) cfg.seed = get_as<std::uint64_t>(doc, "seed", "");
    if (doc.contains("stationary_start")) cfg.stationary_start = get_as<bool>(doc, "stationary_start", "");
    if (doc.contains("burn_in_periods") && !doc.at("burn_in_periods").is_null()) {
        cfg.burn_in_periods = get_count(doc, "burn_in_periods", "");
    }
    if (doc.contains("workers")) cfg.workers = get_count(doc, "workers", "");

    if (doc.contains("estimate")) {
        const json& s = doc.at("estimate");
        reject_unknown(s, {"mode", "path", "correction", "trace", "cross_check"}, "estimate.");
        if (s.contains("mode")) cfg.estimate.mode = parse_mode(get_as<std::string>(s, "mode", "estimate."));
        if (s.contains("path")) cfg.estimate.path = get_as<std::string>(s, "path", "estimate.");
        if (s.contains("correction")) {
            cfg.estimate.correction = parse_correction(get_as<std::string>(s, "correction", "estimate."));
        }
        if (s.contains("trace")) cfg.estimate.trace = parse_trace(get_as<std::string>(s, "trace", "estimate."));
        if (s.contains("cross_check")) cfg.estimate.cross_check = get_as<bool>(s, "cross_check", "estimate.");
    }
    if (doc.contains("mc")) {
        const json& s = doc.at("mc");
        reject_unknown(s, {"n_list", "replicates", "master_seed", "mode", "correction", "trace", "thresholds"},
                       "mc.");
        if (s.contains("n_list")) cfg.mc.n_list = get_as<std::vector<std::size_t>>(s, "n_list", "mc.");
        if (s.contains("replicates")) cfg.mc.replicates = get_count(s, "replicates", "mc.");
        if (s.contains("master_seed")) cfg.mc.master_seed = get_as<std::uint64_t>(s, "master_seed", "mc.");
        if (s.contains("mode")) cfg.mc.mode = parse_mode(get_as<std::string>(s, "mode", "mc."));
        if (s.contains("correction")) cfg.mc.correction = parse_correction(get_as<std::string>(s, "correction", "mc."));
        if (s.contains("trace")) cfg.mc.trace = parse_trace(get_as<std::string>(s, "trace", "mc."));
        if (s.contains("thresholds")) {
            const json& t = s.at("thresholds");
            reject_unknown(t, {"mu_block_distance", "skewness", "excess_kurtosis"}, "mc.thresholds.");
            auto& th = cfg.mc.thresholds;
            if (t.contains("mu_block_distance")) {
                th.max_mu_block_distance = get_as<double>(t, "mu_block_distance", "mc.thresholds.");
            }
            if (t.contains("skewness")) th.max_abs_skewness = get_as<double>(t, "skewness", "mc.thresholds.");
            if (t.contains("excess_kurtosis")) {
                th.max_abs_excess_kurtosis = get_as<double>(t, "excess_kurtosis", "mc.thresholds.");
            }
        }
    }

    if (cfg.step_denominator < 1) throw ConfigError("step_denominator must be >= 1");
    if (cfg.n_periods < 1) throw ConfigError("n_periods must be >= 1");
    if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
    try {
        cfg.model.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &doc;
    std::stringstream parts(key);
    std::string part;
    std::vector<std::string> path;
    while (std::getline(parts, part, '.')) path.push_back(part);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!node->is_object()) throw ConfigError("override path crosses a non-object: " + key);
        node = &(*node)[path[i]];
        if (node->is_null()) *node = json::object();
    }
    if (!node->is_object()) throw ConfigError("override path crosses a non-object: " + key);
    (*node)[path.back()] = std::move(value);
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("malformed JSON in " + path.string());
    return doc;
}

AppConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    json doc = read_json_file(path);
    for (const auto& o : overrides) apply_override(doc, o);
    return config_from_json(doc);
}

}  // namespace perfou
