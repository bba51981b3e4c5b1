#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deixis/resolver.hpp"
#include "deixis/scene.hpp"
#include "deixis/synth.hpp"

namespace deixis {

enum class TaskCategory { Reference, Counting, Spatial, Temporal, Attribute, Feedback };

std::string to_string(TaskCategory category);
std::optional<TaskCategory> category_from_string(const std::string& name);
const std::vector<TaskCategory>& all_categories();

struct SceneFact {
    std::string object_id;
    std::string category;
    std::string referring_expression;
    std::map<std::string, std::string> attributes;
    Vec3 centroid;      // world space
    double depth = -1.0; // camera-space forward coordinate; < 0 when unprojectable
    double u = 0.0;
    double v = 0.0;
    std::vector<std::string> neighbors; // object ids within the neighbor radius
};

struct QaConfig {
    double neighbor_radius = 1.0;
    double depth_deadzone = 0.05; // closer/farther need at least this separation
    double pixel_deadzone = 10.0; // left/right need at least this separation
    double spatial_binary_prob = 0.25;
    int visibility_grid = 8;
    std::map<std::string, int> per_clip_counts; // category name -> items per clip
    bool extra_temporal_on_multi = true;
};

struct StructuredQA {
    TaskCategory category = TaskCategory::Reference;
    std::string question; // contains <objectN> placeholders for pointed targets
    std::string correct_answer;
    std::vector<std::string> target_ids;
    std::map<std::string, std::string> provenance;
    bool binary = false;
};

struct OptionSet {
    std::vector<std::string> options;
    int answer_index = 0;
};

struct QAItem {
    std::string qa_id;
    std::string clip_id;
    TaskCategory category = TaskCategory::Reference;
    std::string question;
    std::vector<std::string> options;
    int answer_index = 0;
    std::vector<std::string> target_ids;
    std::string structured_question;
    std::map<std::string, std::string> provenance;
};

enum class NegativeStrategy { VisibleSource, PlausibleFake, LogicalOpposite };

enum class RephraseMode { Rule, External };

/// Stage-3 rephraser backend; the rule engine is built in, HTTP is pluggable.
class Rephraser {
public:
    virtual ~Rephraser() = default;
    virtual std::string rephrase(const std::string& structured_question,
                                 const std::vector<std::string>& options,
                                 const std::vector<std::string>& placeholders) = 0;
};

/// One fact per visible object, with discriminative referring expressions and
/// neighbor lists. Expressions never mention hands or gestures.
std::vector<SceneFact> extract_scene_facts(const Scene& scene, const CameraPose& camera,
                                           const std::vector<GestureEvent>& referents,
                                           const QaConfig& config = {});

/// Category-specific template instantiation. The correct answer is computed
/// from facts and referents, never sampled.
StructuredQA generate_question(const std::vector<SceneFact>& facts,
                               const std::vector<GestureEvent>& referents,
                               const Scene& scene, TaskCategory category,
                               std::uint64_t seed, const QaConfig& config = {});

/// Hard negatives in priority order VisibleSource -> PlausibleFake ->
/// LogicalOpposite, then a seeded permutation of the final options.
OptionSet generate_negatives(const StructuredQA& qa, const std::vector<SceneFact>& facts,
                             const Scene& scene, std::uint64_t seed,
                             const QaConfig& config = {});

/// Stage 3: replaces pointed-target placeholders with deictic forms. Anchor
/// object mentions are already plain text and stay verbatim.
QAItem rephrase_deictic(const StructuredQA& qa, const OptionSet& options,
                        const std::vector<GestureEvent>& referents, RephraseMode mode,
                        Rephraser* external = nullptr, bool fallback_to_rule = true);

struct ValidationReport {
    bool ok = false;
    std::vector<std::string> failures; // "oracle-answerability", "deictic-ambiguity",
                                       // "option-integrity"
};

ValidationReport validate_item(const QAItem& item, const Scene& scene,
                               const std::vector<GestureEvent>& referents,
                               const CameraPose& camera, const QaConfig& config = {});

/// Recomputes the ground-truth answer string for an item's category and
/// provenance from scene facts and the resolved referent order.
std::string compute_answer(TaskCategory category,
                           const std::map<std::string, std::string>& provenance,
                           const Scene& scene, const std::vector<SceneFact>& facts,
                           const std::vector<GestureEvent>& referents,
                           const QaConfig& config = {});

/// Camera used for fact extraction: the pose at the midpoint of the first
/// resolved gesture (falls back to frame 0).
CameraPose reference_camera(const ClipRecord& clip,
                            const std::vector<GestureEvent>& referents);

struct ClipQaResult {
    std::vector<QAItem> items;
    std::map<std::string, int> infeasible;         // category -> count
    std::map<std::string, int> validation_drops;   // failure -> count
};

/// Full per-clip pipeline: resolve -> facts -> questions -> negatives ->
/// rephrase -> validate.
ClipQaResult generate_clip_items(const ClipRecord& clip,
                                 const std::vector<GestureEvent>& referents,
                                 std::uint64_t seed, const QaConfig& config = {},
                                 RephraseMode mode = RephraseMode::Rule,
                                 Rephraser* external = nullptr,
                                 bool fallback_to_rule = true);

bool contains_word(const std::string& text, const std::string& word);
bool has_deictic_marker(const std::string& question);
std::string spell_ordinal(int one_based);

nlohmann::json qa_item_to_json(const QAItem& item);
QAItem qa_item_from_json(const nlohmann::json& j);

} // namespace deixis
