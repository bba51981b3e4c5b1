#include "deixis/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "deixis/jsonl.hpp"

namespace deixis {

namespace {

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    const auto a = s.find_first_not_of(ws);
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
}

bool in_range(char letter, int num_options) {
    return letter >= 'A' && letter < 'A' + num_options;
}

std::optional<int> single_letter(const std::string& s, int num_options) {
    const std::string t = trim(s);
    if (t.size() == 1 && in_range(t[0], num_options)) return t[0] - 'A';
    return std::nullopt;
}

bool istarts_with(const std::string& s, const std::string& prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

bool iends_with(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    const std::size_t off = s.size() - suffix.size();
    for (std::size_t i = 0; i < suffix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[off + i])) !=
            std::tolower(static_cast<unsigned char>(suffix[i])))
            return false;
    }
    return true;
}

std::string clean_output(const std::string& raw, const ExtractConfig& config) {
    std::string s = trim(raw);

    // <answer>...</answer> markup: keep the inner text
    const auto open = s.find("<answer>");
    const auto close = s.find("</answer>");
    if (open != std::string::npos && close != std::string::npos && close > open) {
        s = trim(s.substr(open + 8, close - open - 8));
    }

    bool changed = true;
    while (changed) {
        changed = false;
        s = trim(s);
        for (const auto& tok : config.control_tokens) {
            if (iends_with(s, tok)) {
                s = s.substr(0, s.size() - tok.size());
                changed = true;
            }
        }
        for (const auto& prefix : config.boilerplate_prefixes) {
            if (istarts_with(s, prefix)) {
                s = s.substr(prefix.size());
                changed = true;
            }
        }
    }
    return trim(s);
}

} // namespace

const ExtractConfig& ExtractConfig::defaults() {
    static const ExtractConfig cfg{
        // control tokens stripped from the tail
        {"<|im_end|>", "<|endoftext|>", "<|end|>", "</s>", "<eos>"},
        // boilerplate prefixes stripped from the head
        {"here's the answer:", "here is the answer:", "the correct answer is",
         "the correct option is", "the answer is", "answer is", "my answer is",
         "final answer:", "sure, the answer is"},
    };
    return cfg;
}

ExtractConfig ExtractConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open stop-list file " + path);
    nlohmann::json j;
    in >> j;
    ExtractConfig cfg;
    cfg.control_tokens = j.at("control_tokens").get<std::vector<std::string>>();
    cfg.boilerplate_prefixes =
        j.at("boilerplate_prefixes").get<std::vector<std::string>>();
    return cfg;
}

std::optional<int> extract_choice(const std::string& raw, int num_options,
                                  const ExtractConfig& config) {
    if (num_options < 2 || num_options > 26) return std::nullopt;

    // (0) whole string is one letter
    if (auto hit = single_letter(raw, num_options)) return hit;

    // (1) strip markup / control tokens / boilerplate, then retry
    const std::string cleaned = clean_output(raw, config);
    if (auto hit = single_letter(cleaned, num_options)) return hit;

    // (i) parenthesized letter
    {
        static const std::regex re(R"(\(([A-Z])\))");
        for (std::sregex_iterator it(cleaned.begin(), cleaned.end(), re), end; it != end;
             ++it) {
            const char letter = (*it)[1].str()[0];
            if (in_range(letter, num_options)) return letter - 'A';
        }
    }
    // (ii) letter followed by punctuation, not embedded in a word
    {
        static const std::regex re(R"((^|[^A-Za-z0-9])([A-Z])([.)\]]))");
        for (std::sregex_iterator it(cleaned.begin(), cleaned.end(), re), end; it != end;
             ++it) {
            const char letter = (*it)[2].str()[0];
            if (in_range(letter, num_options)) return letter - 'A';
        }
    }
    // (iii) "Answer: D" at the end
    {
        static const std::regex re(R"(Answer:\s*([A-Z])[.)\]]?\s*$)");
        std::smatch m;
        if (std::regex_search(cleaned, m, re)) {
            const char letter = m[1].str()[0];
            if (in_range(letter, num_options)) return letter - 'A';
        }
    }
    return std::nullopt;
}

namespace {

ScoreReport finalize_report(
    const std::map<std::string, std::pair<int, int>>& correct_total, int invalid) {
    ScoreReport report;
    report.invalid_count = invalid;
    double sum = 0.0;
    for (const auto& [category, ct] : correct_total) {
        CategoryScore cs;
        cs.n = ct.second;
        cs.accuracy = ct.second > 0 ? 100.0 * ct.first / ct.second : 0.0;
        report.per_category[category] = cs;
        sum += cs.accuracy;
    }
    report.average =
        report.per_category.empty() ? 0.0 : sum / static_cast<double>(report.per_category.size());
    return report;
}

} // namespace

ScoreReport score(const std::vector<QAItem>& dataset,
                  const std::vector<Prediction>& predictions,
                  const ExtractConfig& config) {
    std::map<std::string, const QAItem*> by_id;
    for (const auto& item : dataset) by_id[item.qa_id] = &item;

    std::map<std::string, const Prediction*> pred_by_id;
    for (const auto& pred : predictions) {
        if (by_id.find(pred.qa_id) == by_id.end()) {
            throw UnknownQaId("prediction for unknown qa_id " + pred.qa_id);
        }
        pred_by_id[pred.qa_id] = &pred;
    }

    std::map<std::string, std::pair<int, int>> correct_total;
    int invalid = 0;
    for (const auto& item : dataset) {
        auto& ct = correct_total[to_string(item.category)];
        ++ct.second;
        const auto pit = pred_by_id.find(item.qa_id);
        if (pit == pred_by_id.end()) {
            ++invalid; // missing prediction counts as wrong
            continue;
        }
        const auto choice =
            extract_choice(pit->second->raw_output,
                           static_cast<int>(item.options.size()), config);
        if (!choice) {
            ++invalid;
            continue;
        }
        if (*choice == item.answer_index) ++ct.first;
    }
    return finalize_report(correct_total, invalid);
}

ScoreReport random_baseline(const std::vector<QAItem>& dataset) {
    std::map<std::string, std::pair<double, int>> sum_n;
    for (const auto& item : dataset) {
        auto& sn = sum_n[to_string(item.category)];
        sn.first += 100.0 / static_cast<double>(item.options.size());
        ++sn.second;
    }
    ScoreReport report;
    double total = 0.0;
    for (const auto& [category, sn] : sum_n) {
        CategoryScore cs;
        cs.n = sn.second;
        cs.accuracy = sn.first / sn.second;
        report.per_category[category] = cs;
        total += cs.accuracy;
    }
    report.average = report.per_category.empty()
                         ? 0.0
                         : total / static_cast<double>(report.per_category.size());
    return report;
}

MaskedItem::MaskedItem(const QAItem& item, const ClipRecord* clip, AnswererFlags flags)
    : item_(&item), clip_(clip), flags_(flags),
      num_options_(static_cast<int>(item.options.size())) {}

const std::string& MaskedItem::question() const {
    if (!flags_.sees_question) throw FlagViolation("answerer is not allowed the question");
    return item_->question;
}

const std::vector<std::string>& MaskedItem::options() const {
    if (!flags_.sees_options) throw FlagViolation("answerer is not allowed the options");
    return item_->options;
}

const ClipRecord& MaskedItem::clip() const {
    if (!flags_.sees_video) throw FlagViolation("answerer is not allowed the clip");
    if (clip_ == nullptr) throw FlagViolation("no clip available for this item");
    return *clip_;
}

const QAItem& MaskedItem::full_item() const {
    if (!flags_.sees_video || !flags_.sees_question || !flags_.sees_options) {
        throw FlagViolation("full item access requires all capability flags");
    }
    return *item_;
}

std::string RandomAnswerer::answer(const MaskedItem& item, Rng& rng) {
    return std::string(1, static_cast<char>('A' + rng.index(item.num_options())));
}

std::string BlindAnswerer::answer(const MaskedItem& item, Rng& rng) {
    (void)rng;
    (void)item.question(); // reads the question, heuristically picks the first option
    (void)item.options();
    return "A";
}

std::string ChoicesOnlyAnswerer::answer(const MaskedItem& item, Rng& rng) {
    (void)rng;
    std::string joined;
    for (const auto& opt : item.options()) {
        joined += opt;
        joined += '\x1f';
    }
    const auto idx = fnv1a(joined) % static_cast<std::uint64_t>(item.num_options());
    return std::string(1, static_cast<char>('A' + idx));
}

std::string GeometricOracleAnswerer::answer(const MaskedItem& item, Rng& rng) {
    (void)rng;
    const QAItem& qa = item.full_item();
    const ClipRecord& clip = item.clip();

    const auto referents = resolve_referents(clip, resolver_);
    const CameraPose camera = reference_camera(clip, referents);
    const auto facts = extract_scene_facts(clip.scene, camera, referents, qa_);
    const std::string answer =
        compute_answer(qa.category, qa.provenance, clip.scene, facts, referents, qa_);

    for (std::size_t i = 0; i < qa.options.size(); ++i) {
        if (qa.options[i] == answer) {
            return std::string(1, static_cast<char>('A' + i));
        }
    }
    return "?"; // no option matches: scored invalid
}

ScoreReport run_answerer(const std::vector<QAItem>& dataset,
                         const std::map<std::string, const ClipRecord*>& clips,
                         Answerer& answerer, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Prediction> predictions;
    predictions.reserve(dataset.size());
    const AnswererFlags flags = answerer.flags();
    for (const auto& item : dataset) {
        const ClipRecord* clip = nullptr;
        const auto it = clips.find(item.clip_id);
        if (it != clips.end()) clip = it->second;
        MaskedItem masked(item, clip, flags);
        predictions.push_back({item.qa_id, answerer.answer(masked, rng)});
    }
    return score(dataset, predictions);
}

ScoreReport bias_probe(const std::vector<QAItem>& dataset, Answerer& answerer,
                       std::uint64_t seed) {
    if (answerer.flags().sees_video) {
        throw FlagViolation("bias probes are text-only; answerer declares sees_video");
    }
    return run_answerer(dataset, {}, answerer, seed);
}

std::vector<int> frame_sample(const ClipRecord& clip, int n) {
    std::vector<int> frames;
    const int total = clip.n_frames;
    if (n <= 0 || total <= 0) return frames;
    if (n == 1) return {0};
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * (total - 1) / (n - 1);
        const int idx = static_cast<int>(std::lround(t));
        if (frames.empty() || frames.back() != idx) frames.push_back(idx);
    }
    return frames;
}

std::string report_to_text(const ScoreReport& report, const std::string& title) {
    std::ostringstream out;
    out << title << "\n";
    out << "  category     accuracy      n\n";
    for (const auto& [category, cs] : report.per_category) {
        out << "  " << category;
        for (std::size_t i = category.size(); i < 12; ++i) out << ' ';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%8.1f %6d", cs.accuracy, cs.n);
        out << buf << "\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "  %-12s %8.1f", "Average", report.average);
    out << buf << "\n";
    if (report.invalid_count > 0) out << "  invalid: " << report.invalid_count << "\n";
    return out.str();
}

std::string report_to_csv(const ScoreReport& report) {
    std::ostringstream out;
    out << "category,accuracy,n\n";
    for (const auto& [category, cs] : report.per_category) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s,%.4f,%d\n", category.c_str(), cs.accuracy, cs.n);
        out << buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "Average,%.4f,%d\n", report.average, 0);
    out << buf;
    return out.str();
}

std::string report_to_svg(const ScoreReport& report, const std::string& title) {
    const int bar_w = 70;
    const int gap = 20;
    const int height = 240;
    const int base = 200;
    const int width =
        40 + static_cast<int>(report.per_category.size()) * (bar_w + gap) + 40;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    out << "<text x=\"10\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
    int x = 40;
    for (const auto& [category, cs] : report.per_category) {
        const int h = static_cast<int>(cs.accuracy / 100.0 * 150.0);
        out << "<rect x=\"" << x << "\" y=\"" << (base - h) << "\" width=\"" << bar_w
            << "\" height=\"" << h << "\" fill=\"#4a90d9\"/>\n";
        out << "<text x=\"" << x << "\" y=\"" << (base + 16) << "\" font-size=\"11\">"
            << category << "</text>\n";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", cs.accuracy);
        out << "<text x=\"" << x << "\" y=\"" << (base - h - 4) << "\" font-size=\"11\">"
            << buf << "</text>\n";
        x += bar_w + gap;
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace deixis
