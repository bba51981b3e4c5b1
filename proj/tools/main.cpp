#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <atomic>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "deixis/config.hpp"
#include "deixis/eval.hpp"
#include "deixis/jsonl.hpp"
#include "deixis/matrix.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_clips;
    std::optional<int> jobs;
    std::optional<double> tau;
};

deixis::PipelineConfig load_config(const CommonOpts& opts) {
    deixis::ConfigMap map;
    if (!opts.config_path.empty()) map = deixis::parse_config_file(opts.config_path);
    deixis::apply_env_overrides(map);
    for (const auto& ov : opts.overrides) deixis::apply_override(map, ov);
    auto cfg = deixis::PipelineConfig::from_map(map);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.n_clips) cfg.n_clips = *opts.n_clips;
    if (opts.jobs) cfg.jobs = std::max(1, *opts.jobs);
    if (opts.tau) {
        cfg.tau = *opts.tau;
        cfg.scorer.tau = *opts.tau;
    }
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "config file (key = value with [sections])");
    cmd->add_option("--set", opts.overrides, "override, key=value (repeatable)");
    cmd->add_option("--seed", opts.seed, "base RNG seed");
    cmd->add_option("--n-clips", opts.n_clips, "number of accepted clips to produce");
    cmd->add_option("--jobs", opts.jobs, "worker threads");
    cmd->add_option("--tau", opts.tau, "hand-token gate threshold");
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw deixis::IoFailure("cannot write " + path);
    out << content;
}

void write_manifest(const std::string& dir, const json& manifest) {
    write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
    // timestamps live in a sidecar so manifests stay byte-stable
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const json meta{{"created_unix_s",
                     std::chrono::duration_cast<std::chrono::seconds>(now).count()}};
    write_text_file(dir + "/manifest.meta.json", meta.dump(2) + "\n");
}

/// Deterministic parallel map: results are collected in index order no
/// matter how many workers run.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    std::atomic<int> next{0};
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : workers) t.join();
}

// ---------------------------------------------------------------- forge ----

int cmd_forge(const deixis::PipelineConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    {
        std::ofstream probe(out_dir + "/.write_probe");
        if (!probe) throw deixis::IoFailure("output dir not writable: " + out_dir);
    }
    fs::remove(out_dir + "/.write_probe");

    std::vector<json> accepted;
    std::vector<json> rejected;
    std::map<std::string, int> reject_reasons;
    int attempts = 0;
    const int max_attempts = cfg.n_clips * 20 + 100;

    // candidates are generated in blocks so workers stay busy while the
    // accept order stays a pure function of the seed sequence
    const int block = std::max(cfg.jobs * 4, 8);
    std::uint64_t next_seed = cfg.seed;
    while (static_cast<int>(accepted.size()) < cfg.n_clips && attempts < max_attempts) {
        const int want = std::min(block, max_attempts - attempts);
        std::vector<std::optional<deixis::ClipRecord>> clips(want);
        std::vector<deixis::FilterReport> reports(want);
        const std::uint64_t base = next_seed;
        parallel_for(want, cfg.jobs, [&](int i) {
            try {
                auto clip = deixis::forge_clip(base + i, cfg.gen);
                reports[i] = deixis::quality_filter(clip, cfg.gen);
                clips[i] = std::move(clip);
            } catch (const deixis::Error&) {
                clips[i] = std::nullopt; // infeasible draw, skipped
            }
        });
        for (int i = 0; i < want && static_cast<int>(accepted.size()) < cfg.n_clips; ++i) {
            ++attempts;
            if (!clips[i]) {
                ++reject_reasons["generation-error"];
                continue;
            }
            if (reports[i].accept) {
                accepted.push_back(deixis::clip_to_json(*clips[i]));
            } else {
                json reasons = json::array();
                for (const auto& r : reports[i].reasons) {
                    reasons.push_back(r);
                    ++reject_reasons[r];
                }
                rejected.push_back({{"clip_id", clips[i]->clip_id}, {"reasons", reasons}});
            }
        }
        next_seed = base + want;
    }

    if (static_cast<int>(accepted.size()) < cfg.n_clips) {
        std::cerr << "forge: only " << accepted.size() << "/" << cfg.n_clips
                  << " clips accepted within the attempt budget\n";
        return kExitValidation;
    }

    deixis::write_jsonl(out_dir + "/clips.jsonl", accepted);
    deixis::write_jsonl(out_dir + "/rejects.jsonl", rejected);

    json manifest{{"tool", "deixis-forge"},
                  {"seed", cfg.seed},
                  {"config_hash", deixis::config_hash(cfg)},
                  {"n_requested", cfg.n_clips},
                  {"n_accepted", accepted.size()},
                  {"n_attempted", attempts},
                  {"acceptance_rate",
                   static_cast<double>(accepted.size()) / std::max(1, attempts)},
                  {"reject_reasons", reject_reasons}};
    write_manifest(out_dir, manifest);
    std::cout << "forge: " << accepted.size() << " clips accepted out of " << attempts
              << " attempts -> " << out_dir << "/clips.jsonl\n";
    return kExitOk;
}

// ------------------------------------------------------------------- qa ----

std::vector<deixis::ClipRecord> load_clips(const std::string& path) {
    std::vector<deixis::ClipRecord> clips;
    for (const auto& j : deixis::read_jsonl(path)) clips.push_back(deixis::clip_from_json(j));
    return clips;
}

std::vector<deixis::QAItem> load_dataset(const std::string& path) {
    std::vector<deixis::QAItem> items;
    for (const auto& j : deixis::read_jsonl(path)) items.push_back(deixis::qa_item_from_json(j));
    return items;
}

int check_manifest_hash(const std::string& clips_path, const deixis::PipelineConfig& cfg,
                        bool force) {
    const fs::path manifest_path = fs::path(clips_path).parent_path() / "manifest.json";
    if (!fs::exists(manifest_path)) return kExitOk;
    std::ifstream in(manifest_path);
    json manifest;
    in >> manifest;
    const std::string have = manifest.value("config_hash", "");
    const std::string want = deixis::config_hash(cfg);
    if (!have.empty() && have != want) {
        if (force) {
            std::cerr << "warning: config hash mismatch (" << have << " vs " << want
                      << "), continuing under --force\n";
            return kExitOk;
        }
        std::cerr << "qa: clips were forged under config hash " << have
                  << " but the current config hashes to " << want
                  << "; rerun with --force to mix\n";
        return kExitValidation;
    }
    return kExitOk;
}

int cmd_qa(const deixis::PipelineConfig& cfg, const std::string& clips_path,
           const std::string& out_dir, const std::vector<std::string>& categories,
           bool force) {
    deixis::PipelineConfig effective = cfg;
    if (!categories.empty()) {
        effective.qa.per_clip_counts.clear();
        for (const auto& name : categories) {
            const auto cat = deixis::category_from_string(name);
            if (!cat) {
                std::cerr << "qa: unknown category " << name << "\n";
                return kExitUsage;
            }
            effective.qa.per_clip_counts[deixis::to_string(*cat)] = 1;
        }
    }

    if (const int rc = check_manifest_hash(clips_path, cfg, force); rc != kExitOk) return rc;

    const auto clips = load_clips(clips_path);
    fs::create_directories(out_dir);

    std::unique_ptr<deixis::HttpRephraser> http;
    deixis::RephraseMode mode = deixis::RephraseMode::Rule;
    if (effective.rephrase_mode == "external") {
        mode = deixis::RephraseMode::External;
        http = std::make_unique<deixis::HttpRephraser>(effective.rephraser);
    }

    std::vector<deixis::ClipQaResult> results(clips.size());
    std::vector<std::vector<deixis::GestureEvent>> all_events(clips.size());
    std::atomic<bool> rephraser_down{false};
    parallel_for(static_cast<int>(clips.size()), effective.jobs, [&](int i) {
        try {
            all_events[i] = deixis::resolve_referents(clips[i], effective.resolver);
            results[i] = deixis::generate_clip_items(
                clips[i], all_events[i], effective.seed ^ deixis::fnv1a(clips[i].clip_id),
                effective.qa, mode, http.get(), effective.rephraser_fallback);
        } catch (const deixis::RephraserUnavailable&) {
            rephraser_down = true;
        }
    });
    if (rephraser_down) {
        std::cerr << "qa: external rephraser unavailable and fallback disabled\n";
        return kExitValidation;
    }

    std::vector<json> dataset;
    std::vector<json> resolved;
    std::map<std::string, int> per_category;
    std::map<std::string, int> infeasible;
    std::map<std::string, int> drops;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        resolved.push_back(deixis::events_to_json(clips[i].clip_id, all_events[i]));
        for (const auto& item : results[i].items) {
            dataset.push_back(deixis::qa_item_to_json(item));
            ++per_category[deixis::to_string(item.category)];
        }
        for (const auto& [k, v] : results[i].infeasible) infeasible[k] += v;
        for (const auto& [k, v] : results[i].validation_drops) drops[k] += v;
    }

    deixis::write_jsonl(out_dir + "/dataset.jsonl", dataset);
    deixis::write_jsonl(out_dir + "/resolved.jsonl", resolved);

    json manifest{{"tool", "deixis-qa"},
                  {"seed", cfg.seed},
                  {"config_hash", deixis::config_hash(cfg)},
                  {"n_clips", clips.size()},
                  {"n_items", dataset.size()},
                  {"per_category", per_category},
                  {"category_infeasible", infeasible},
                  {"validation_drops", drops}};
    write_manifest(out_dir, manifest);

    std::cout << "qa: " << dataset.size() << " items from " << clips.size() << " clips\n";
    for (const auto& [k, v] : per_category) std::cout << "  " << k << ": " << v << "\n";
    int total_drops = 0;
    for (const auto& [k, v] : drops) total_drops += v;
    std::cout << "  validation drops: " << total_drops << "\n";
    return kExitOk;
}

// -------------------------------------------------------------- adapter ----

int cmd_adapter_check(const deixis::PipelineConfig& cfg) {
    using namespace deixis;
    Rng rng(cfg.seed ^ 0xc43c4cULL);
    int failures = 0;
    auto expect = [&](bool ok, const std::string& what, const std::string& dump) {
        if (ok) return;
        ++failures;
        std::cerr << "FAIL " << what << "\n  " << dump << "\n";
    };

    // gate + shape behavior
    {
        AdapterParams p = AdapterParams::init(8, 16, rng);
        std::array<Vec3, kNumHandKeypoints> k{};
        for (auto& v : k) v = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1)};
        expect(!adapter_forward(p, k, 0.3, {0.5}).present(), "gate-closed-forward", "c=0.3");
        bool threw = false;
        try {
            adapter_backward(p, k, 0.3, {0.5}, Vector(16, 1.0));
        } catch (const GateClosed&) {
            threw = true;
        }
        expect(threw, "gate-closed-backward", "expected GateClosed");
    }

    // finite-difference gradient check over random configurations
    for (int trial = 0; trial < 24; ++trial) {
        const std::size_t d_h = 2 + rng.index(6);
        const std::size_t d = 2 + rng.index(8);
        AdapterParams p = AdapterParams::init(d_h, d, rng);
        for (auto& v : p.ln_gain) v = rng.uniform(0.5, 1.5);
        for (auto& v : p.ln_bias) v = rng.uniform(-0.2, 0.2);
        std::array<Vec3, kNumHandKeypoints> k{};
        for (auto& v : k) v = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                               rng.uniform(0.2, 1.0)};
        Vector grad_out(d);
        for (auto& v : grad_out) v = rng.uniform(-1, 1);

        const auto grads = adapter_backward(p, k, 0.9, {0.5}, grad_out);
        auto loss = [&](const AdapterParams& q) {
            const auto token = adapter_forward(q, k, 0.9, {0.5});
            return dot(*token.value, grad_out);
        };
        const double h = 1e-5;
        for (int probe = 0; probe < 6; ++probe) {
            const std::size_t idx = rng.index(p.w1.data.size());
            AdapterParams plus = p;
            AdapterParams minus = p;
            plus.w1.data[idx] += h;
            minus.w1.data[idx] -= h;
            const double fd = (loss(plus) - loss(minus)) / (2 * h);
            const double an = grads.w1.data[idx];
            const double rel = std::fabs(fd - an) / std::max(1e-8, std::fabs(fd));
            expect(rel < 1e-4, "fd-w1",
                   "trial " + std::to_string(trial) + " idx " + std::to_string(idx) +
                       " fd=" + std::to_string(fd) + " an=" + std::to_string(an));
        }
    }

    if (failures > 0) {
        std::cerr << "adapter check: " << failures << " failures\n";
        return kExitValidation;
    }
    std::cout << "adapter check: all suites passed\n";
    return kExitOk;
}

struct BuiltItems {
    std::vector<deixis::ScoringItem> train;
    std::vector<deixis::ScoringItem> holdout;
    std::vector<deixis::QAItem> holdout_items;
};

BuiltItems build_scoring_items(const deixis::PipelineConfig& cfg,
                               const std::vector<deixis::ClipRecord>& clips,
                               const std::vector<deixis::QAItem>& dataset) {
    using namespace deixis;
    std::map<std::string, const ClipRecord*> by_id;
    for (const auto& c : clips) by_id[c.clip_id] = &c;

    std::map<std::string, std::vector<const QAItem*>> items_by_clip;
    for (const auto& item : dataset) items_by_clip[item.clip_id].push_back(&item);

    BuiltItems out;
    for (const auto& [clip_id, items] : items_by_clip) {
        const auto cit = by_id.find(clip_id);
        if (cit == by_id.end()) continue;
        const ClipRecord& clip = *cit->second;
        const auto referents = resolve_referents(clip, cfg.resolver);
        const CameraPose camera = reference_camera(clip, referents);
        const auto facts = extract_scene_facts(clip.scene, camera, referents, cfg.qa);
        const bool holdout = fnv1a(clip_id) % 5 == 0; // clip-level split
        for (const QAItem* item : items) {
            auto si = make_scoring_item(clip, *item, facts, cfg.scorer);
            if (holdout) {
                out.holdout.push_back(std::move(si));
                out.holdout_items.push_back(*item);
            } else {
                out.train.push_back(std::move(si));
            }
        }
    }
    return out;
}

int cmd_adapter_train(const deixis::PipelineConfig& cfg, const std::string& dataset_path,
                      const std::string& clips_path, const std::string& out_dir,
                      bool ablate) {
    using namespace deixis;
    const auto clips = load_clips(clips_path);
    const auto dataset = load_dataset(dataset_path);
    fs::create_directories(out_dir);

    const BuiltItems built = build_scoring_items(cfg, clips, dataset);
    std::cout << (ablate ? "ablate" : "train") << ": " << built.train.size()
              << " train items, " << built.holdout.size() << " holdout items\n";
    if (built.train.empty() || built.holdout.empty()) {
        std::cerr << "not enough items for a train/holdout split\n";
        return kExitValidation;
    }

    auto run = [&](bool strip) {
        ToySequenceModel model = ToySequenceModel::init(cfg.scorer, cfg.seed);
        TrainConfig tc = cfg.train;
        tc.strip_hand = strip;
        const TrainResult trace = toy_train(model, built.train, tc);
        return std::make_pair(std::move(model), trace);
    };

    auto per_category_accuracy = [&](const ToySequenceModel& model, bool strip) {
        std::map<std::string, std::pair<int, int>> ct;
        for (std::size_t i = 0; i < built.holdout.size(); ++i) {
            const auto& si = built.holdout[i];
            const auto seq = assemble_sequence(model, si, strip);
            const auto scores = toy_score(model, seq, si.option_embeddings);
            const int best = static_cast<int>(
                std::max_element(scores.begin(), scores.end()) - scores.begin());
            auto& c = ct[to_string(si.category)];
            ++c.second;
            if (best == si.gold) ++c.first;
        }
        json out = json::object();
        for (const auto& [k, v] : ct) {
            out[k] = {{"accuracy", 100.0 * v.first / std::max(1, v.second)},
                      {"n", v.second}};
        }
        return out;
    };

    auto [model_on, trace_on] = run(false);
    const double acc_on = accuracy(model_on, built.holdout, false);

    json result{{"config_hash", config_hash(cfg)},
                {"train_items", built.train.size()},
                {"holdout_items", built.holdout.size()},
                {"gated", {{"holdout_accuracy", acc_on},
                           {"final_loss", trace_on.loss_trace.back()},
                           {"per_category", per_category_accuracy(model_on, false)}}}};

    {
        std::ofstream out(out_dir + "/model.json", std::ios::trunc);
        out << model_to_json(model_on).dump() << "\n";
    }
    {
        std::ofstream out(out_dir + "/loss_trace.csv", std::ios::trunc);
        out << "step,loss\n";
        for (std::size_t i = 0; i < trace_on.loss_trace.size(); ++i) {
            out << i << "," << trace_on.loss_trace[i] << "\n";
        }
    }

    if (ablate) {
        auto [model_off, trace_off] = run(true);
        const double acc_off = accuracy(model_off, built.holdout, true);
        const auto baseline = random_baseline(built.holdout_items);
        result["stripped"] = {{"holdout_accuracy", acc_off},
                              {"final_loss", trace_off.loss_trace.back()},
                              {"per_category", per_category_accuracy(model_off, true)}};
        result["accuracy_gap"] = acc_on - acc_off;
        result["random_baseline_average"] = baseline.average;
        std::cout << "ablate: gated " << acc_on << " vs stripped " << acc_off
                  << " (gap " << acc_on - acc_off << ", random "
                  << baseline.average << ")\n";
    } else {
        std::cout << "train: holdout accuracy " << acc_on << "\n";
    }

    write_text_file(out_dir + (ablate ? "/ablate.json" : "/train.json"),
                    result.dump(2) + "\n");
    return kExitOk;
}

// ----------------------------------------------------------------- eval ----

int run_self_check() {
    using namespace deixis;
    int failures = 0;
    auto expect = [&](bool ok, const char* what) {
        if (!ok) {
            ++failures;
            std::cerr << "FAIL self-check: " << what << "\n";
        }
    };

    expect(extract_choice(" B ", 5) == 1, "plain letter");
    expect(extract_choice("<answer>C</answer>", 5) == 2, "answer markup");
    expect(extract_choice("thinking... Answer: D", 5) == 3, "terminal Answer:");
    expect(!extract_choice("E", 4).has_value(), "out of range");

    QAItem item;
    item.qa_id = "q0";
    item.category = TaskCategory::Reference;
    item.options = {"a", "b", "c", "d", "e"};
    item.answer_index = 2;
    const auto base = random_baseline({item});
    expect(base.per_category.at("Reference").accuracy == 20.0, "random baseline 5-way");

    ClipRecord clip;
    clip.n_frames = 94;
    const auto frames = frame_sample(clip, 32);
    expect(frames.size() == 32 && frames.front() == 0 && frames.back() == 93,
           "frame_sample endpoints");

    if (failures > 0) return kExitValidation;
    std::cout << "self-check: all invariants hold\n";
    return kExitOk;
}

int cmd_eval(const deixis::PipelineConfig& cfg, const std::string& dataset_path,
             const std::string& predictions_path, const std::string& clips_path,
             const std::string& out_dir, const std::vector<std::string>& probes,
             bool oracle, bool svg, bool self_check, const std::string& stoplists_path) {
    using namespace deixis;
    if (self_check) return run_self_check();

    const ExtractConfig extract_cfg = stoplists_path.empty()
                                          ? ExtractConfig::defaults()
                                          : ExtractConfig::from_json_file(stoplists_path);
    const auto dataset = load_dataset(dataset_path);
    fs::create_directories(out_dir);

    auto emit = [&](const ScoreReport& report, const std::string& name) {
        const std::string title = "deixis " + name;
        write_text_file(out_dir + "/" + name + ".txt", report_to_text(report, title));
        write_text_file(out_dir + "/" + name + ".csv", report_to_csv(report));
        if (svg) write_text_file(out_dir + "/" + name + ".svg", report_to_svg(report, title));
        std::cout << report_to_text(report, title);
    };

    if (!predictions_path.empty()) {
        std::vector<Prediction> predictions;
        for (const auto& j : read_jsonl(predictions_path)) {
            predictions.push_back({j.at("qa_id").get<std::string>(),
                                   j.at("raw_output").get<std::string>()});
        }
        emit(score(dataset, predictions, extract_cfg), "score");
    }

    emit(random_baseline(dataset), "random_baseline");

    for (const auto& probe : probes) {
        if (probe == "blind") {
            BlindAnswerer answerer;
            emit(bias_probe(dataset, answerer, cfg.seed), "probe_blind");
        } else if (probe == "choices-only") {
            ChoicesOnlyAnswerer answerer;
            emit(bias_probe(dataset, answerer, cfg.seed), "probe_choices_only");
        } else if (probe == "random") {
            RandomAnswerer answerer;
            emit(bias_probe(dataset, answerer, cfg.seed), "probe_random");
        } else {
            std::cerr << "unknown probe " << probe << "\n";
            return kExitUsage;
        }
    }

    if (oracle) {
        if (clips_path.empty()) {
            std::cerr << "--oracle requires --clips\n";
            return kExitUsage;
        }
        const auto clips = load_clips(clips_path);
        std::map<std::string, const ClipRecord*> by_id;
        for (const auto& c : clips) by_id[c.clip_id] = &c;
        GeometricOracleAnswerer answerer(cfg.resolver, cfg.qa);
        emit(run_answerer(dataset, by_id, answerer, cfg.seed), "oracle");
    }
    return kExitOk;
}

int cmd_report(const std::string& dataset_path, const std::string& out_dir) {
    using namespace deixis;
    const auto dataset = load_dataset(dataset_path);
    fs::create_directories(out_dir);

    std::map<std::string, int> per_category;
    for (const auto& item : dataset) ++per_category[to_string(item.category)];

    std::ostringstream out;
    out << "dataset: " << dataset.size() << " items\n";
    for (const auto& [k, v] : per_category) out << "  " << k << ": " << v << "\n";
    out << report_to_text(random_baseline(dataset), "analytic random baseline");
    write_text_file(out_dir + "/dataset_report.txt", out.str());
    std::cout << out.str();
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deixis: gesture-grounded egocentric VQA data forge, resolver, "
                 "toy gated-token scorer, and evaluation harness"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string out_dir = "out";
    std::string clips_path;
    std::string dataset_path;
    std::string predictions_path;
    std::vector<std::string> categories;
    std::vector<std::string> probes;
    bool force = false;
    bool oracle = false;
    bool svg = false;
    bool self_check = false;

    auto* forge = app.add_subcommand("forge", "generate synthetic clips");
    add_common(forge, opts);
    forge->add_option("--out", out_dir, "output directory");

    auto* qa = app.add_subcommand("qa", "resolve referents and generate QA items");
    add_common(qa, opts);
    qa->add_option("--clips", clips_path, "clips JSONL from forge")->required();
    qa->add_option("--out", out_dir, "output directory");
    qa->add_option("--categories", categories, "restrict to these categories");
    qa->add_flag("--force", force, "ignore config-hash mismatches");

    auto* adapter = app.add_subcommand("adapter", "keypoint-adapter suites");
    adapter->require_subcommand(1);
    auto* check = adapter->add_subcommand("check", "gradient and gating suites");
    add_common(check, opts);
    auto* train = adapter->add_subcommand("train", "fit the toy scorer");
    add_common(train, opts);
    train->add_option("--dataset", dataset_path, "QA dataset JSONL")->required();
    train->add_option("--clips", clips_path, "clips JSONL")->required();
    train->add_option("--out", out_dir, "output directory");
    auto* ablate = adapter->add_subcommand("ablate", "gated vs hand-stripped pair");
    add_common(ablate, opts);
    ablate->add_option("--dataset", dataset_path, "QA dataset JSONL")->required();
    ablate->add_option("--clips", clips_path, "clips JSONL")->required();
    ablate->add_option("--out", out_dir, "output directory");

    auto* eval = app.add_subcommand("eval", "score predictions and run probes");
    add_common(eval, opts);
    eval->add_option("--dataset", dataset_path, "QA dataset JSONL");
    eval->add_option("--predictions", predictions_path, "predictions JSONL");
    eval->add_option("--clips", clips_path, "clips JSONL (oracle)");
    eval->add_option("--out", out_dir, "output directory");
    eval->add_option("--probe", probes, "bias probes: blind, choices-only, random")
        ->delimiter(',');
    eval->add_flag("--oracle", oracle, "run the geometric oracle answerer");
    eval->add_flag("--svg", svg, "emit SVG bar charts");
    eval->add_flag("--self-check", self_check, "run built-in invariant checks");
    std::string stoplists_path;
    eval->add_option("--stoplists", stoplists_path,
                     "extraction stop-list JSON (default: built-in lists, mirrored in "
                     "data/extract_stoplists.json)");

    auto* report = app.add_subcommand("report", "dataset statistics");
    report->add_option("--dataset", dataset_path, "QA dataset JSONL")->required();
    report->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        const deixis::PipelineConfig cfg = load_config(opts);
        if (forge->parsed()) return cmd_forge(cfg, out_dir);
        if (qa->parsed()) return cmd_qa(cfg, clips_path, out_dir, categories, force);
        if (adapter->parsed()) {
            if (check->parsed()) return cmd_adapter_check(cfg);
            if (train->parsed())
                return cmd_adapter_train(cfg, dataset_path, clips_path, out_dir, false);
            if (ablate->parsed())
                return cmd_adapter_train(cfg, dataset_path, clips_path, out_dir, true);
        }
        if (eval->parsed()) {
            if (dataset_path.empty() && !self_check) {
                std::cerr << "eval requires --dataset (or --self-check)\n";
                return kExitUsage;
            }
            return cmd_eval(cfg, dataset_path, predictions_path, clips_path, out_dir,
                            probes, oracle, svg, self_check, stoplists_path);
        }
        if (report->parsed()) return cmd_report(dataset_path, out_dir);
    } catch (const deixis::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitIo;
    } catch (const deixis::IoFailure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const deixis::ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const deixis::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitUsage;
}
