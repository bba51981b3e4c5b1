#include "deixis/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

extern char** environ;

namespace deixis {

namespace {

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    const auto a = s.find_first_not_of(ws);
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(12);
    out << v;
    return out.str();
}

} // namespace

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open config file " + path);
    ConfigMap map;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected key = value",
                             line_no);
        }
        std::string key = trim(t.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        map[key] = trim(t.substr(eq + 1));
    }
    return map;
}

void apply_env_overrides(ConfigMap& map) {
    // DEIXIS_GEN_FPS=60 overrides key "gen.fps"
    for (char** env = environ; *env != nullptr; ++env) {
        const std::string entry(*env);
        if (entry.rfind("DEIXIS_", 0) != 0) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        std::string key = entry.substr(7, eq - 7);
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        std::replace(key.begin(), key.end(), '_', '.');
        map[key] = entry.substr(eq + 1);
    }
}

void apply_override(ConfigMap& map, const std::string& key_eq_value) {
    const auto eq = key_eq_value.find('=');
    if (eq == std::string::npos) {
        throw ConfigInvalid("override must be key=value, got " + key_eq_value);
    }
    map[trim(key_eq_value.substr(0, eq))] = trim(key_eq_value.substr(eq + 1));
}

PipelineConfig PipelineConfig::from_map(const ConfigMap& map) {
    PipelineConfig cfg;
    auto get = [&](const char* key) -> const std::string* {
        const auto it = map.find(key);
        return it != map.end() ? &it->second : nullptr;
    };
    auto get_u64 = [&](const char* key, std::uint64_t& out) {
        if (const auto* v = get(key)) out = std::stoull(*v);
    };
    auto get_int = [&](const char* key, int& out) {
        if (const auto* v = get(key)) out = std::stoi(*v);
    };
    auto get_double = [&](const char* key, double& out) {
        if (const auto* v = get(key)) out = std::stod(*v);
    };
    auto get_size = [&](const char* key, std::size_t& out) {
        if (const auto* v = get(key)) out = std::stoull(*v);
    };
    auto get_bool = [&](const char* key, bool& out) {
        if (const auto* v = get(key)) out = (*v == "true" || *v == "1" || *v == "yes");
    };
    auto get_str = [&](const char* key, std::string& out) {
        if (const auto* v = get(key)) out = *v;
    };

    get_u64("seed", cfg.seed);
    get_int("n_clips", cfg.n_clips);
    get_int("jobs", cfg.jobs);
    get_double("tau", cfg.tau);

    get_int("gen.min_objects", cfg.gen.min_objects);
    get_int("gen.max_objects", cfg.gen.max_objects);
    get_double("gen.fps", cfg.gen.fps);
    get_double("gen.clip_len_min_s", cfg.gen.clip_len_min_s);
    get_double("gen.clip_len_max_s", cfg.gen.clip_len_max_s);
    get_int("gen.max_gestures", cfg.gen.max_gestures);
    get_double("gen.jitter_deg", cfg.gen.jitter_deg);
    get_double("gen.confidence_noise", cfg.gen.confidence_noise);
    get_double("gen.confidence_base", cfg.gen.confidence_base);
    get_double("gen.tau_hand_visible", cfg.gen.tau_hand_visible);
    get_int("gen.visibility_grid", cfg.gen.visibility_grid);

    get_double("resolver.conf_threshold", cfg.resolver.conf_threshold);
    get_double("resolver.dwell_min_s", cfg.resolver.dwell_min_s);
    get_double("resolver.angle_max", cfg.resolver.angle_max_deg);

    for (TaskCategory c : all_categories()) {
        std::string name = to_string(c);
        std::transform(name.begin(), name.end(), name.begin(), ::tolower);
        if (const auto* v = get(("qa." + name).c_str())) {
            cfg.qa.per_clip_counts[to_string(c)] = std::stoi(*v);
        }
    }
    get_double("qa.neighbor_radius", cfg.qa.neighbor_radius);
    get_double("qa.depth_deadzone", cfg.qa.depth_deadzone);
    get_double("qa.pixel_deadzone", cfg.qa.pixel_deadzone);
    get_double("qa.spatial_binary_prob", cfg.qa.spatial_binary_prob);
    get_bool("qa.extra_temporal_on_multi", cfg.qa.extra_temporal_on_multi);

    get_size("scorer.d", cfg.scorer.d);
    get_size("scorer.d_h", cfg.scorer.d_h);
    get_int("scorer.frames", cfg.scorer.frames);
    get_int("scorer.n_vis", cfg.scorer.n_vis);

    get_int("train.steps", cfg.train.steps);
    get_double("train.lr", cfg.train.lr);

    get_str("rephraser.mode", cfg.rephrase_mode);
    get_str("rephraser.endpoint", cfg.rephraser.endpoint);
    get_double("rephraser.timeout_s", cfg.rephraser.timeout_s);
    get_int("rephraser.max_inflight", cfg.rephraser.max_inflight);
    get_bool("rephraser.fallback", cfg.rephraser_fallback);

    cfg.scorer.tau = cfg.tau;
    if (cfg.rephrase_mode != "rule" && cfg.rephrase_mode != "external") {
        throw ConfigInvalid("rephraser.mode must be rule or external");
    }
    return cfg;
}

ConfigMap PipelineConfig::to_map() const {
    ConfigMap m;
    m["seed"] = std::to_string(seed);
    m["n_clips"] = std::to_string(n_clips);
    m["jobs"] = std::to_string(jobs);
    m["tau"] = fmt(tau);
    m["gen.min_objects"] = std::to_string(gen.min_objects);
    m["gen.max_objects"] = std::to_string(gen.max_objects);
    m["gen.fps"] = fmt(gen.fps);
    m["gen.clip_len_min_s"] = fmt(gen.clip_len_min_s);
    m["gen.clip_len_max_s"] = fmt(gen.clip_len_max_s);
    m["gen.max_gestures"] = std::to_string(gen.max_gestures);
    m["gen.jitter_deg"] = fmt(gen.jitter_deg);
    m["gen.confidence_noise"] = fmt(gen.confidence_noise);
    m["gen.confidence_base"] = fmt(gen.confidence_base);
    m["gen.tau_hand_visible"] = fmt(gen.tau_hand_visible);
    m["gen.visibility_grid"] = std::to_string(gen.visibility_grid);
    m["resolver.conf_threshold"] = fmt(resolver.conf_threshold);
    m["resolver.dwell_min_s"] = fmt(resolver.dwell_min_s);
    m["resolver.angle_max"] = fmt(resolver.angle_max_deg);
    for (const auto& [name, count] : qa.per_clip_counts) {
        std::string key = name;
        std::transform(key.begin(), key.end(), key.begin(), ::tolower);
        m["qa." + key] = std::to_string(count);
    }
    m["qa.neighbor_radius"] = fmt(qa.neighbor_radius);
    m["qa.depth_deadzone"] = fmt(qa.depth_deadzone);
    m["qa.pixel_deadzone"] = fmt(qa.pixel_deadzone);
    m["qa.spatial_binary_prob"] = fmt(qa.spatial_binary_prob);
    m["qa.extra_temporal_on_multi"] = qa.extra_temporal_on_multi ? "true" : "false";
    m["scorer.d"] = std::to_string(scorer.d);
    m["scorer.d_h"] = std::to_string(scorer.d_h);
    m["scorer.frames"] = std::to_string(scorer.frames);
    m["scorer.n_vis"] = std::to_string(scorer.n_vis);
    m["train.steps"] = std::to_string(train.steps);
    m["train.lr"] = fmt(train.lr);
    m["rephraser.mode"] = rephrase_mode;
    m["rephraser.endpoint"] = rephraser.endpoint;
    m["rephraser.timeout_s"] = fmt(rephraser.timeout_s);
    m["rephraser.max_inflight"] = std::to_string(rephraser.max_inflight);
    m["rephraser.fallback"] = rephraser_fallback ? "true" : "false";
    return m;
}

std::string config_hash(const PipelineConfig& config) {
    std::string canon;
    for (const auto& [k, v] : config.to_map()) {
        canon += k;
        canon += '=';
        canon += v;
        canon += '\n';
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(canon)));
    return buf;
}

} // namespace deixis
