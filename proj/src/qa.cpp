#include "deixis/qa.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

#include "deixis/rng.hpp"
#include "deixis/vocab.hpp"

namespace deixis {

namespace {

const std::vector<std::string>& expression_stop_list() {
    static const std::vector<std::string> v = {"point", "hand", "finger", "gesture"};
    return v;
}

constexpr const char* kRelLeft = "to the left of";
constexpr const char* kRelRight = "to the right of";
constexpr const char* kRelCloser = "closer to you than";
constexpr const char* kRelFarther = "farther from you than";
constexpr const char* kRelBehind = "directly behind";

std::string opposite_relation(const std::string& rel) {
    if (rel == kRelLeft) return kRelRight;
    if (rel == kRelRight) return kRelLeft;
    if (rel == kRelCloser) return kRelFarther;
    if (rel == kRelFarther) return kRelCloser;
    return {};
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

const SceneFact* find_fact(const std::vector<SceneFact>& facts, const std::string& id) {
    for (const auto& f : facts) {
        if (f.object_id == id) return &f;
    }
    return nullptr;
}

int scene_index_of(const Scene& scene, const std::string& id) {
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        if (scene.objects[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

std::string placeholder_for(const Scene& scene, const std::string& id) {
    return "<object" + std::to_string(scene_index_of(scene, id)) + ">";
}

/// Relation of `target` with respect to `anchor` in the reference camera
/// frame; empty when both axes fall inside their dead-zones.
std::string spatial_relation(const SceneFact& target, const SceneFact& anchor,
                             const QaConfig& config) {
    if (target.depth <= 0.0 || anchor.depth <= 0.0) return {};
    const double du = target.u - anchor.u;
    if (std::fabs(du) > config.pixel_deadzone) return du < 0.0 ? kRelLeft : kRelRight;
    const double dz = target.depth - anchor.depth;
    if (std::fabs(dz) > config.depth_deadzone) return dz < 0.0 ? kRelCloser : kRelFarther;
    return {};
}

int category_count(const Scene& scene, const std::string& category) {
    int n = 0;
    for (const auto& o : scene.objects) {
        if (o.category == category) ++n;
    }
    return n;
}

struct TargetInfo {
    int ordinal = 0; // index into the referent list
    std::string id;
    const SceneFact* fact = nullptr;
};

TargetInfo pick_target(const std::vector<SceneFact>& facts,
                       const std::vector<GestureEvent>& referents, TaskCategory category,
                       Rng& rng) {
    if (referents.empty()) throw CategoryInfeasible("no resolved referents");
    TargetInfo t;
    switch (category) {
        case TaskCategory::Reference:
            // bare "this" conventionally refers to the most recent gesture
            t.ordinal = static_cast<int>(referents.size()) - 1;
            break;
        case TaskCategory::Temporal:
            if (referents.size() < 2)
                throw CategoryInfeasible("Temporal needs at least two gestures");
            t.ordinal = static_cast<int>(rng.index(referents.size()));
            break;
        default:
            t.ordinal = static_cast<int>(rng.index(referents.size()));
            break;
    }
    t.id = referents[t.ordinal].referent_id;
    t.fact = find_fact(facts, t.id);
    if (t.fact == nullptr)
        throw CategoryInfeasible("referent " + t.id + " not among visible facts");
    return t;
}

std::vector<const SceneFact*> anchor_candidates(const std::vector<SceneFact>& facts,
                                                const TargetInfo& target, Rng& rng) {
    // anchors must not share the target's category, or the exempt anchor
    // mention would leak it
    std::vector<const SceneFact*> neighbors;
    std::vector<const SceneFact*> rest;
    for (const auto& f : facts) {
        if (f.object_id == target.id || f.category == target.fact->category) continue;
        if (f.depth <= 0.0) continue;
        const bool is_neighbor =
            std::find(target.fact->neighbors.begin(), target.fact->neighbors.end(),
                      f.object_id) != target.fact->neighbors.end();
        (is_neighbor ? neighbors : rest).push_back(&f);
    }
    rng.shuffle(neighbors);
    rng.shuffle(rest);
    neighbors.insert(neighbors.end(), rest.begin(), rest.end());
    return neighbors;
}

} // namespace

std::string to_string(TaskCategory category) {
    switch (category) {
        case TaskCategory::Reference: return "Reference";
        case TaskCategory::Counting: return "Counting";
        case TaskCategory::Spatial: return "Spatial";
        case TaskCategory::Temporal: return "Temporal";
        case TaskCategory::Attribute: return "Attribute";
        case TaskCategory::Feedback: return "Feedback";
    }
    return "Reference";
}

std::optional<TaskCategory> category_from_string(const std::string& name) {
    const std::string n = lower(name);
    for (TaskCategory c : all_categories()) {
        if (lower(to_string(c)) == n) return c;
    }
    return std::nullopt;
}

const std::vector<TaskCategory>& all_categories() {
    static const std::vector<TaskCategory> v = {
        TaskCategory::Reference, TaskCategory::Counting,  TaskCategory::Spatial,
        TaskCategory::Temporal,  TaskCategory::Attribute, TaskCategory::Feedback};
    return v;
}

bool contains_word(const std::string& text, const std::string& word) {
    if (word.empty()) return false;
    const std::string t = lower(text);
    const std::string w = lower(word);
    std::size_t pos = 0;
    while ((pos = t.find(w, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(t[pos - 1]));
        const std::size_t end = pos + w.size();
        const bool right_ok =
            end >= t.size() || !std::isalnum(static_cast<unsigned char>(t[end]));
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

bool has_deictic_marker(const std::string& question) {
    static const std::vector<std::string> tokens = {"this", "that",  "these", "those",
                                                    "it",   "here",  "there"};
    for (const auto& tok : tokens) {
        if (contains_word(question, tok)) return true;
    }
    const std::string q = lower(question);
    return q.find("object i pointed at") != std::string::npos ||
           q.find("objects i pointed at") != std::string::npos;
}

std::string spell_ordinal(int one_based) {
    static const std::vector<std::string> names = {"first",  "second", "third", "fourth",
                                                   "fifth",  "sixth",  "seventh", "eighth",
                                                   "ninth",  "tenth"};
    if (one_based >= 1 && one_based <= static_cast<int>(names.size()))
        return names[one_based - 1];
    return std::to_string(one_based) + "th";
}

std::vector<SceneFact> extract_scene_facts(const Scene& scene, const CameraPose& camera,
                                           const std::vector<GestureEvent>& referents,
                                           const QaConfig& config) {
    (void)referents; // facts are hand-agnostic; referents only gate the callers
    std::vector<SceneFact> facts;

    for (const auto& obj : scene.objects) {
        std::vector<SceneObject> occluders;
        for (const auto& o : scene.objects) {
            if (o.id != obj.id) occluders.push_back(o);
        }
        if (visible_fraction(obj, camera, occluders, config.visibility_grid) <= 0.0)
            continue;

        SceneFact f;
        f.object_id = obj.id;
        f.category = obj.category;
        f.attributes = obj.attributes;
        f.centroid = obj.centroid();
        const Vec3 cam_c = camera.world_to_camera(f.centroid);
        if (cam_c.z > 0.0) {
            f.depth = cam_c.z;
            f.u = camera.intrinsics.cx + camera.intrinsics.fx * cam_c.x / cam_c.z;
            f.v = camera.intrinsics.cy + camera.intrinsics.fy * cam_c.y / cam_c.z;
        }
        facts.push_back(std::move(f));
    }

    // base expression "the <color> <category>"; suffix attributes until unique
    for (auto& f : facts) {
        f.referring_expression = "the " + f.attributes.at("color") + " " + f.category;
    }
    for (auto& f : facts) {
        auto colliders = [&](const std::string& expr) {
            int n = 0;
            for (const auto& g : facts) {
                if (g.referring_expression == expr) ++n;
            }
            return n;
        };
        if (colliders(f.referring_expression) > 1) {
            f.referring_expression =
                "the " + f.attributes.at("color") + " " + f.attributes.at("material") +
                " " + f.category;
        }
    }
    // ordinal fallback for anything still colliding
    std::map<std::string, int> seen;
    for (auto& f : facts) {
        int total = 0;
        for (const auto& g : facts) {
            if (g.referring_expression == f.referring_expression) ++total;
        }
        if (total > 1) {
            const int k = ++seen[f.referring_expression];
            f.referring_expression =
                "the " + spell_ordinal(k) + " " + f.referring_expression.substr(4);
        }
    }

    for (const auto& f : facts) {
        for (const auto& bad : expression_stop_list()) {
            if (contains_word(f.referring_expression, bad)) {
                throw ValidationFailed("referring expression '" + f.referring_expression +
                                       "' mentions gesture vocabulary");
            }
        }
    }

    for (auto& f : facts) {
        for (const auto& g : facts) {
            if (g.object_id == f.object_id) continue;
            if ((g.centroid - f.centroid).norm() <= config.neighbor_radius) {
                f.neighbors.push_back(g.object_id);
            }
        }
    }
    return facts;
}

std::string compute_answer(TaskCategory category,
                           const std::map<std::string, std::string>& provenance,
                           const Scene& scene, const std::vector<SceneFact>& facts,
                           const std::vector<GestureEvent>& referents,
                           const QaConfig& config) {
    const auto ord_it = provenance.find("referent_ordinal");
    if (ord_it == provenance.end()) throw CategoryInfeasible("missing referent ordinal");
    const int ordinal = std::stoi(ord_it->second);
    if (ordinal < 0 || ordinal >= static_cast<int>(referents.size()))
        throw CategoryInfeasible("referent ordinal out of range");
    const std::string target_id = referents[ordinal].referent_id;
    const SceneFact* target = find_fact(facts, target_id);
    if (target == nullptr) throw CategoryInfeasible("referent not visible");

    switch (category) {
        case TaskCategory::Reference:
        case TaskCategory::Temporal:
            return target->referring_expression;
        case TaskCategory::Attribute:
            return target->attributes.at(provenance.at("attribute"));
        case TaskCategory::Counting:
            return std::to_string(category_count(scene, target->category));
        case TaskCategory::Spatial: {
            const SceneFact* anchor = find_fact(facts, provenance.at("anchor_id"));
            if (anchor == nullptr) throw CategoryInfeasible("anchor not visible");
            if (provenance.at("form") == "binary") {
                const double dz = target->depth - anchor->depth;
                if (dz < -config.depth_deadzone) return "Yes";
                if (dz > config.depth_deadzone) return "No";
                throw CategoryInfeasible("depth near-tie");
            }
            const std::string rel = spatial_relation(*target, *anchor, config);
            if (rel.empty()) throw CategoryInfeasible("spatial near-tie");
            return rel + " " + anchor->referring_expression;
        }
        case TaskCategory::Feedback: {
            const std::string& goal = provenance.at("goal");
            for (const auto& [g, cats] : vocab::affordance_goals()) {
                if (g == goal) {
                    const bool suits = std::find(cats.begin(), cats.end(),
                                                 target->category) != cats.end();
                    return suits ? "Yes" : "No";
                }
            }
            throw CategoryInfeasible("unknown goal " + goal);
        }
    }
    throw CategoryInfeasible("unhandled category");
}

StructuredQA generate_question(const std::vector<SceneFact>& facts,
                               const std::vector<GestureEvent>& referents,
                               const Scene& scene, TaskCategory category,
                               std::uint64_t seed, const QaConfig& config) {
    Rng rng(seed ^ 0x51a3c9d2ULL);
    StructuredQA qa;
    qa.category = category;

    const TargetInfo target = pick_target(facts, referents, category, rng);
    qa.target_ids = {target.id};
    qa.provenance["referent_ordinal"] = std::to_string(target.ordinal);
    qa.provenance["target_category"] = target.fact->category;
    qa.provenance["target_expression"] = target.fact->referring_expression;
    const std::string ph = placeholder_for(scene, target.id);

    switch (category) {
        case TaskCategory::Reference:
        case TaskCategory::Temporal:
            qa.question = "What is " + ph + "?";
            break;
        case TaskCategory::Attribute: {
            static const std::vector<std::string> attrs = {"color", "material", "shape",
                                                           "state"};
            const std::string attr = attrs[rng.index(attrs.size())];
            qa.provenance["attribute"] = attr;
            if (attr == "color")
                qa.question = "What color is " + ph + "?";
            else if (attr == "material")
                qa.question = "What material is " + ph + " made of?";
            else if (attr == "shape")
                qa.question = "What shape is " + ph + "?";
            else
                qa.question = "What is the current state of " + ph + "?";
            break;
        }
        case TaskCategory::Counting:
            qa.question = "How many objects of the same type as " + ph + " are there?";
            break;
        case TaskCategory::Spatial: {
            const bool binary = rng.uniform() < config.spatial_binary_prob;
            const auto anchors = anchor_candidates(facts, target, rng);
            const SceneFact* anchor = nullptr;
            if (binary) {
                // keep Yes/No balanced: draw the wanted answer, then look for
                // an anchor that yields it (either side as fallback)
                const bool want_yes = rng.coin();
                const SceneFact* fallback = nullptr;
                for (const SceneFact* cand : anchors) {
                    const double dz = target.fact->depth - cand->depth;
                    if (std::fabs(dz) <= config.depth_deadzone) continue;
                    if ((dz < 0.0) == want_yes) {
                        anchor = cand;
                        break;
                    }
                    if (fallback == nullptr) fallback = cand;
                }
                if (anchor == nullptr) anchor = fallback;
            } else {
                for (const SceneFact* cand : anchors) {
                    if (!spatial_relation(*target.fact, *cand, config).empty()) {
                        anchor = cand;
                        break;
                    }
                }
            }
            if (anchor == nullptr)
                throw CategoryInfeasible("no anchor outside the dead-zones");
            qa.binary = binary;
            qa.provenance["anchor_id"] = anchor->object_id;
            qa.provenance["anchor_expression"] = anchor->referring_expression;
            qa.provenance["form"] = binary ? "binary" : "relation";
            if (binary) {
                qa.question = "Is " + ph + " closer to you than " +
                              anchor->referring_expression + "?";
            } else {
                qa.question =
                    "Where is " + ph + " relative to " + anchor->referring_expression + "?";
            }
            break;
        }
        case TaskCategory::Feedback: {
            auto usable = [&](const std::vector<std::string>& goals) {
                std::vector<std::string> out;
                for (const auto& g : goals) {
                    if (!contains_word(g, target.fact->category)) out.push_back(g);
                }
                return out;
            };
            const auto yes_goals = usable(vocab::goals_suiting(target.fact->category));
            const auto no_goals = usable(vocab::goals_not_suiting(target.fact->category));
            std::vector<std::string> pool;
            if (rng.coin() && !yes_goals.empty())
                pool = yes_goals;
            else if (!no_goals.empty())
                pool = no_goals;
            else
                pool = yes_goals;
            if (pool.empty()) throw CategoryInfeasible("no usable goal for category");
            const std::string goal = pool[rng.index(pool.size())];
            qa.binary = true;
            qa.provenance["goal"] = goal;
            qa.question = "I want to " + goal + ". Can I use " + ph + " for that?";
            break;
        }
    }

    qa.correct_answer =
        compute_answer(category, qa.provenance, scene, facts, referents, config);
    return qa;
}

OptionSet generate_negatives(const StructuredQA& qa, const std::vector<SceneFact>& facts,
                             const Scene& scene, std::uint64_t seed,
                             const QaConfig& config) {
    if (qa.binary) {
        OptionSet out;
        out.options = {"Yes", "No"};
        out.answer_index = qa.correct_answer == "Yes" ? 0 : 1;
        return out;
    }

    Rng rng(seed ^ 0x9e6a77);
    const std::string& target_id = qa.target_ids.front();
    const SceneFact* target = find_fact(facts, target_id);

    std::vector<std::string> distractors;
    auto add = [&](const std::string& cand) {
        if (cand.empty() || cand == qa.correct_answer) return false;
        if (std::find(distractors.begin(), distractors.end(), cand) != distractors.end())
            return false;
        if (static_cast<int>(distractors.size()) >= 4) return false;
        distractors.push_back(cand);
        return true;
    };

    // strategy 1: visible sources, nearest context first
    auto visible_sources = [&]() {
        std::vector<std::string> cands;
        switch (qa.category) {
            case TaskCategory::Reference:
            case TaskCategory::Temporal: {
                std::vector<std::string> tier1; // other facts near the target
                std::vector<std::string> tier2;
                for (const auto& f : facts) {
                    if (f.object_id == target_id) continue;
                    const bool near =
                        target != nullptr &&
                        std::find(target->neighbors.begin(), target->neighbors.end(),
                                  f.object_id) != target->neighbors.end();
                    (near ? tier1 : tier2).push_back(f.referring_expression);
                }
                rng.shuffle(tier1);
                rng.shuffle(tier2);
                cands = tier1;
                cands.insert(cands.end(), tier2.begin(), tier2.end());
                break;
            }
            case TaskCategory::Attribute: {
                const std::string attr = qa.provenance.at("attribute");
                std::vector<std::string> tier1;
                std::vector<std::string> tier2;
                for (const auto& f : facts) {
                    if (f.object_id == target_id) continue;
                    const auto it = f.attributes.find(attr);
                    if (it == f.attributes.end()) continue;
                    const bool near =
                        target != nullptr &&
                        std::find(target->neighbors.begin(), target->neighbors.end(),
                                  f.object_id) != target->neighbors.end();
                    (near ? tier1 : tier2).push_back(it->second);
                }
                rng.shuffle(tier1);
                rng.shuffle(tier2);
                cands = tier1;
                cands.insert(cands.end(), tier2.begin(), tier2.end());
                break;
            }
            case TaskCategory::Spatial: {
                const SceneFact* anchor = find_fact(facts, qa.provenance.at("anchor_id"));
                if (anchor == nullptr) break;
                for (const auto& f : facts) {
                    if (f.object_id == target_id || f.object_id == anchor->object_id)
                        continue;
                    const std::string rel = spatial_relation(f, *anchor, config);
                    if (!rel.empty())
                        cands.push_back(rel + " " + anchor->referring_expression);
                }
                break;
            }
            case TaskCategory::Counting: {
                std::vector<std::string> seen_cats;
                for (const auto& o : scene.objects) {
                    if (target != nullptr && o.category == target->category) continue;
                    if (std::find(seen_cats.begin(), seen_cats.end(), o.category) !=
                        seen_cats.end())
                        continue;
                    seen_cats.push_back(o.category);
                    cands.push_back(std::to_string(category_count(scene, o.category)));
                }
                break;
            }
            default:
                break;
        }
        return cands;
    };

    // strategy 2: plausible fakes from the vocabulary
    auto plausible_fakes = [&]() {
        std::vector<std::string> cands;
        switch (qa.category) {
            case TaskCategory::Reference:
            case TaskCategory::Temporal: {
                for (int i = 0; i < 40 && static_cast<int>(cands.size()) < 6; ++i) {
                    const std::string expr =
                        "the " + vocab::colors()[rng.index(vocab::colors().size())] + " " +
                        vocab::categories()[rng.index(vocab::categories().size())];
                    bool clashes = false;
                    for (const auto& f : facts) {
                        if (f.referring_expression == expr) clashes = true;
                    }
                    if (!clashes) cands.push_back(expr);
                }
                break;
            }
            case TaskCategory::Attribute: {
                const std::string attr = qa.provenance.at("attribute");
                std::vector<std::string> pool;
                if (attr == "color")
                    pool = vocab::colors();
                else if (attr == "material")
                    pool = vocab::materials();
                else if (attr == "shape")
                    pool = vocab::shapes();
                else
                    pool = {"full", "empty", "open", "closed", "new", "used"};
                rng.shuffle(pool);
                cands = pool;
                break;
            }
            case TaskCategory::Spatial: {
                const std::string anchor = qa.provenance.at("anchor_expression");
                // the opposite first, so it survives even if earlier
                // strategies filled most slots
                for (const char* rel : {kRelLeft, kRelRight, kRelCloser, kRelFarther,
                                        kRelBehind}) {
                    const std::string phrase = std::string(rel) + " " + anchor;
                    const std::string opp = opposite_relation(
                        qa.correct_answer.substr(0, qa.correct_answer.size() - anchor.size() - 1));
                    if (!opp.empty() && rel == opp) {
                        cands.insert(cands.begin(), phrase);
                    } else {
                        cands.push_back(phrase);
                    }
                }
                break;
            }
            case TaskCategory::Counting: {
                const int correct = std::stoi(qa.correct_answer);
                for (int delta : {1, -1, 2, -2, 3, -3, 4, -4}) {
                    const int val = correct + delta;
                    if (val >= 1) cands.push_back(std::to_string(val));
                }
                break;
            }
            default:
                break;
        }
        return cands;
    };

    // strategy 3: logical opposites
    auto logical_opposites = [&]() {
        std::vector<std::string> cands;
        if (qa.category == TaskCategory::Spatial) {
            const std::string anchor = qa.provenance.at("anchor_expression");
            const std::string rel =
                qa.correct_answer.substr(0, qa.correct_answer.size() - anchor.size() - 1);
            const std::string opp = opposite_relation(rel);
            if (!opp.empty()) cands.push_back(opp + " " + anchor);
        } else if (qa.category == TaskCategory::Attribute &&
                   qa.provenance.at("attribute") == "state") {
            const std::string opp = vocab::opposite_state(qa.correct_answer);
            if (!opp.empty()) cands.push_back(opp);
        }
        return cands;
    };

    for (const auto& cand : visible_sources()) add(cand);
    for (const auto& cand : plausible_fakes()) add(cand);
    for (const auto& cand : logical_opposites()) add(cand);

    if (distractors.size() < 4) {
        throw InsufficientDistractors(to_string(qa.category) + ": only " +
                                      std::to_string(distractors.size()) +
                                      " distinct distractors");
    }

    OptionSet out;
    out.options.push_back(qa.correct_answer);
    out.options.insert(out.options.end(), distractors.begin(), distractors.end());
    rng.shuffle(out.options);
    out.answer_index = static_cast<int>(
        std::find(out.options.begin(), out.options.end(), qa.correct_answer) -
        out.options.begin());
    return out;
}

namespace {

std::string apply_rule_rephrase(const StructuredQA& qa,
                                const std::vector<GestureEvent>& referents) {
    std::string question = qa.question;
    const std::regex placeholder("<object([0-9]+)>");
    std::string deictic;
    if (referents.size() <= 1) {
        deictic = qa.category == TaskCategory::Feedback ? "it" : "this";
    } else if (qa.category == TaskCategory::Reference) {
        deictic = "this"; // bare demonstrative = the most recent gesture
    } else if (qa.provenance.count("plural") != 0u) {
        deictic = "these";
    } else {
        const int ordinal = std::stoi(qa.provenance.at("referent_ordinal"));
        deictic = "the " + spell_ordinal(ordinal + 1) + " object I pointed at";
    }
    return std::regex_replace(question, placeholder, deictic);
}

bool leaks_target(const std::string& question, const StructuredQA& qa) {
    const std::string& category = qa.provenance.at("target_category");
    const std::string& expression = qa.provenance.at("target_expression");
    if (contains_word(question, category)) return true;
    return lower(question).find(lower(expression)) != std::string::npos;
}

} // namespace

QAItem rephrase_deictic(const StructuredQA& qa, const OptionSet& options,
                        const std::vector<GestureEvent>& referents, RephraseMode mode,
                        Rephraser* external, bool fallback_to_rule) {
    if (qa.question.find("<object") == std::string::npos) {
        throw ValidationFailed("structured question has no <objectN> placeholder");
    }

    std::string question;
    if (mode == RephraseMode::External) {
        std::vector<std::string> placeholders;
        const std::regex re("<object[0-9]+>");
        for (std::sregex_iterator it(qa.question.begin(), qa.question.end(), re), end;
             it != end; ++it) {
            placeholders.push_back(it->str());
        }
        bool ok = false;
        if (external != nullptr) {
            try {
                question = external->rephrase(qa.question, options.options, placeholders);
                ok = !question.empty() && question.find("<object") == std::string::npos &&
                     has_deictic_marker(question) && !leaks_target(question, qa);
            } catch (const Error&) {
                ok = false;
            }
        }
        if (!ok) {
            if (!fallback_to_rule) {
                throw RephraserUnavailable("external rephraser failed and fallback disabled");
            }
            question = apply_rule_rephrase(qa, referents);
        }
    } else {
        question = apply_rule_rephrase(qa, referents);
    }

    if (leaks_target(question, qa)) {
        throw ValidationFailed("rephrased question leaks the target: " + question);
    }

    QAItem item;
    item.category = qa.category;
    item.question = question;
    item.options = options.options;
    item.answer_index = options.answer_index;
    item.target_ids = qa.target_ids;
    item.structured_question = qa.question;
    item.provenance = qa.provenance;
    return item;
}

ValidationReport validate_item(const QAItem& item, const Scene& scene,
                               const std::vector<GestureEvent>& referents,
                               const CameraPose& camera, const QaConfig& config) {
    ValidationReport report;

    // (c) option integrity
    bool options_ok = item.answer_index >= 0 &&
                      item.answer_index < static_cast<int>(item.options.size());
    const bool binary = item.category == TaskCategory::Feedback ||
                        (item.provenance.count("form") != 0u &&
                         item.provenance.at("form") == "binary");
    options_ok = options_ok && item.options.size() == (binary ? 2u : 5u);
    for (std::size_t i = 0; options_ok && i < item.options.size(); ++i) {
        for (std::size_t j = i + 1; j < item.options.size(); ++j) {
            if (item.options[i] == item.options[j]) {
                options_ok = false;
                break;
            }
        }
    }
    if (!options_ok) report.failures.push_back("option-integrity");

    // (a) oracle answerability
    bool oracle_ok = false;
    try {
        const auto facts = extract_scene_facts(scene, camera, referents, config);
        const std::string answer = compute_answer(item.category, item.provenance, scene,
                                                  facts, referents, config);
        oracle_ok = item.answer_index >= 0 &&
                    item.answer_index < static_cast<int>(item.options.size()) &&
                    item.options[item.answer_index] == answer;
    } catch (const Error&) {
        oracle_ok = false;
    }
    if (!oracle_ok) report.failures.push_back("oracle-answerability");

    // (b) deictic ambiguity
    bool deictic_ok = has_deictic_marker(item.question);
    for (const auto& id : item.target_ids) {
        const SceneObject* obj = scene.find(id);
        if (obj == nullptr) continue;
        if (contains_word(item.question, obj->category)) deictic_ok = false;
        if (obj->referring_expression &&
            lower(item.question).find(lower(*obj->referring_expression)) !=
                std::string::npos) {
            deictic_ok = false;
        }
    }
    if (item.provenance.count("target_expression") != 0u &&
        lower(item.question).find(lower(item.provenance.at("target_expression"))) !=
            std::string::npos) {
        deictic_ok = false;
    }
    if (!deictic_ok) report.failures.push_back("deictic-ambiguity");

    report.ok = report.failures.empty();
    return report;
}

CameraPose reference_camera(const ClipRecord& clip,
                            const std::vector<GestureEvent>& referents) {
    if (clip.camera_track.empty()) return CameraPose{};
    int frame = 0;
    if (!referents.empty()) {
        frame = (referents.front().start_frame + referents.front().end_frame) / 2;
    }
    frame = std::clamp(frame, 0, static_cast<int>(clip.camera_track.size()) - 1);
    return clip.camera_track[frame];
}

ClipQaResult generate_clip_items(const ClipRecord& clip,
                                 const std::vector<GestureEvent>& referents,
                                 std::uint64_t seed, const QaConfig& config,
                                 RephraseMode mode, Rephraser* external,
                                 bool fallback_to_rule) {
    ClipQaResult result;
    if (referents.empty()) return result;

    const CameraPose camera = reference_camera(clip, referents);
    const auto facts = extract_scene_facts(clip.scene, camera, referents, config);

    auto slot_count = [&](TaskCategory c) {
        const auto it = config.per_clip_counts.find(to_string(c));
        int n = it != config.per_clip_counts.end() ? it->second
                                                   : (config.per_clip_counts.empty() ? 1 : 0);
        if (c == TaskCategory::Temporal && n >= 1 && referents.size() >= 2 &&
            config.extra_temporal_on_multi) {
            ++n;
        }
        return n;
    };

    std::vector<TaskCategory> slots;
    std::vector<TaskCategory> enabled;
    for (TaskCategory c : all_categories()) {
        const int n = slot_count(c);
        if (n > 0) enabled.push_back(c);
        for (int i = 0; i < n; ++i) slots.push_back(c);
    }

    Rng rng(seed ^ fnv1a(clip.clip_id));
    int emitted = 0;
    for (std::size_t s = 0; s < slots.size(); ++s) {
        Rng slot_rng = rng.fork(s);

        std::vector<TaskCategory> order = {slots[s]};
        for (TaskCategory c : enabled) {
            if (c != slots[s]) order.push_back(c);
        }

        for (TaskCategory category : order) {
            try {
                const StructuredQA qa = generate_question(facts, referents, clip.scene,
                                                          category, slot_rng.next_u64(),
                                                          config);
                const OptionSet options = generate_negatives(qa, facts, clip.scene,
                                                             slot_rng.next_u64(), config);
                QAItem item = rephrase_deictic(qa, options, referents, mode, external,
                                               fallback_to_rule);
                item.clip_id = clip.clip_id;
                item.qa_id = clip.clip_id + "-q" + std::to_string(emitted);

                const auto report =
                    validate_item(item, clip.scene, referents, camera, config);
                if (!report.ok) {
                    for (const auto& f : report.failures) ++result.validation_drops[f];
                    break; // slot dropped, failure recorded
                }
                result.items.push_back(std::move(item));
                ++emitted;
                break;
            } catch (const RephraserUnavailable&) {
                throw;
            } catch (const Error&) {
                ++result.infeasible[to_string(category)];
                // try the next category for this slot
            }
        }
    }
    return result;
}

nlohmann::json qa_item_to_json(const QAItem& item) {
    return nlohmann::json{{"qa_id", item.qa_id},
                          {"clip_id", item.clip_id},
                          {"category", to_string(item.category)},
                          {"question", item.question},
                          {"options", item.options},
                          {"answer_index", item.answer_index},
                          {"target_ids", item.target_ids},
                          {"structured_question", item.structured_question},
                          {"provenance", item.provenance}};
}

QAItem qa_item_from_json(const nlohmann::json& j) {
    QAItem item;
    item.qa_id = j.at("qa_id").get<std::string>();
    item.clip_id = j.at("clip_id").get<std::string>();
    const auto cat = category_from_string(j.at("category").get<std::string>());
    if (!cat) throw ParseError("unknown category " + j.at("category").get<std::string>(), 0);
    item.category = *cat;
    item.question = j.at("question").get<std::string>();
    item.options = j.at("options").get<std::vector<std::string>>();
    item.answer_index = j.at("answer_index").get<int>();
    item.target_ids = j.at("target_ids").get<std::vector<std::string>>();
    item.structured_question = j.at("structured_question").get<std::string>();
    item.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
    return item;
}

} // namespace deixis
