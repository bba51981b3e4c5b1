#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "deixis/qa.hpp"
#include "deixis/resolver.hpp"
#include "deixis/rng.hpp"
#include "deixis/synth.hpp"

namespace deixis {

struct Prediction {
    std::string qa_id;
    std::string raw_output;
};

struct CategoryScore {
    double accuracy = 0.0; // percent
    int n = 0;
};

struct ScoreReport {
    std::map<std::string, CategoryScore> per_category;
    double average = 0.0; // unweighted mean over categories
    int invalid_count = 0;
};

/// Stop-lists for the answer-extraction ladder. The defaults are embedded;
/// a JSON data file with the same content ships alongside the binary so the
/// ladder stays extensible without a rebuild.
struct ExtractConfig {
    std::vector<std::string> control_tokens;
    std::vector<std::string> boilerplate_prefixes;

    static const ExtractConfig& defaults();
    static ExtractConfig from_json_file(const std::string& path);
};

/// Answer-letter extraction ladder:
///   (0) trimmed whole string is a single in-range letter;
///   (1) strip <answer> markup, trailing control tokens, boilerplate
///       prefixes, then retry (0);
///   (i) parenthesized letter "(A)"; (ii) letter + punctuation "A." / "B)" /
///   "C]"; (iii) terminal "Answer: D".
/// Matches are restricted to A..A+num_options-1; no match means invalid.
std::optional<int> extract_choice(const std::string& raw, int num_options,
                                  const ExtractConfig& config = ExtractConfig::defaults());

/// Exact-index multiple-choice accuracy per category; invalid or missing
/// predictions count as wrong; average is the unweighted category mean.
ScoreReport score(const std::vector<QAItem>& dataset,
                  const std::vector<Prediction>& predictions,
                  const ExtractConfig& config = ExtractConfig::defaults());

/// Analytic expected accuracy of uniform guessing: per-category mean of
/// 100/|options|. No sampling.
ScoreReport random_baseline(const std::vector<QAItem>& dataset);

struct AnswererFlags {
    bool sees_video = false;
    bool sees_question = false;
    bool sees_options = false;
};

/// View of one item with fields masked per the answerer's declared flags;
/// reading a masked field throws FlagViolation.
class MaskedItem {
public:
    MaskedItem(const QAItem& item, const ClipRecord* clip, AnswererFlags flags);

    int num_options() const { return num_options_; }
    const std::string& question() const;
    const std::vector<std::string>& options() const;
    const ClipRecord& clip() const;
    const QAItem& full_item() const; // gated on sees_video && sees_question && sees_options

private:
    const QAItem* item_;
    const ClipRecord* clip_;
    AnswererFlags flags_;
    int num_options_;
};

class Answerer {
public:
    virtual ~Answerer() = default;
    virtual AnswererFlags flags() const = 0;
    virtual bool concurrent_safe() const { return false; }
    virtual std::string answer(const MaskedItem& item, Rng& rng) = 0;
};

/// Uniform seeded pick.
class RandomAnswerer : public Answerer {
public:
    AnswererFlags flags() const override { return {false, false, false}; }
    std::string answer(const MaskedItem& item, Rng& rng) override;
};

/// Question + options, no video; deterministic pick-first heuristic.
class BlindAnswerer : public Answerer {
public:
    AnswererFlags flags() const override { return {false, true, true}; }
    std::string answer(const MaskedItem& item, Rng& rng) override;
};

/// Options only; picks by a hash of the option texts.
class ChoicesOnlyAnswerer : public Answerer {
public:
    AnswererFlags flags() const override { return {false, false, true}; }
    std::string answer(const MaskedItem& item, Rng& rng) override;
};

/// Full access: re-resolves referents from the hand track and recomputes the
/// answer from scene facts. Scores 100 on any self-consistent dataset.
class GeometricOracleAnswerer : public Answerer {
public:
    explicit GeometricOracleAnswerer(ResolverConfig resolver = {}, QaConfig qa = {})
        : resolver_(resolver), qa_(qa) {}
    AnswererFlags flags() const override { return {true, true, true}; }
    std::string answer(const MaskedItem& item, Rng& rng) override;

private:
    ResolverConfig resolver_;
    QaConfig qa_;
};

/// Runs an answerer over the dataset with per-item masking and scores the
/// outputs through the extraction ladder.
ScoreReport run_answerer(const std::vector<QAItem>& dataset,
                         const std::map<std::string, const ClipRecord*>& clips,
                         Answerer& answerer, std::uint64_t seed);

/// Text-side probes never see clips.
ScoreReport bias_probe(const std::vector<QAItem>& dataset, Answerer& answerer,
                       std::uint64_t seed);

/// n indices uniformly spaced over [0, n_frames-1], endpoints included,
/// deduplicated when n exceeds the frame count.
std::vector<int> frame_sample(const ClipRecord& clip, int n);

std::string report_to_text(const ScoreReport& report, const std::string& title);
std::string report_to_csv(const ScoreReport& report);
std::string report_to_svg(const ScoreReport& report, const std::string& title);

} // namespace deixis
