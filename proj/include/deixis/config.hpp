#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "deixis/qa.hpp"
#include "deixis/rephraser.hpp"
#include "deixis/resolver.hpp"
#include "deixis/scorer.hpp"
#include "deixis/synth.hpp"

namespace deixis {

/// Flat key-value config with [section] prefixes. Values are strings in the
/// map; typed accessors live on PipelineConfig. Priority when building a
/// config: file < DEIXIS_* environment < command-line overrides.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_file(const std::string& path);
void apply_env_overrides(ConfigMap& map);
void apply_override(ConfigMap& map, const std::string& key_eq_value);

struct PipelineConfig {
    std::uint64_t seed = 42;
    int n_clips = 50;
    int jobs = 1;
    double tau = 0.5; // gate threshold for hand-intent tokens
    GenConfig gen;
    ResolverConfig resolver;
    QaConfig qa;
    ScorerConfig scorer;
    TrainConfig train;
    std::string rephrase_mode = "rule"; // rule | external
    RephraserConfig rephraser;
    bool rephraser_fallback = true;

    static PipelineConfig from_map(const ConfigMap& map);
    ConfigMap to_map() const; // canonical: every field, sorted by key
};

/// FNV-1a over the canonical key=value serialization.
std::string config_hash(const PipelineConfig& config);

} // namespace deixis
