#include "deixis/vocab.hpp"

#include <algorithm>

namespace deixis::vocab {

const std::vector<std::string>& categories() {
    static const std::vector<std::string> v = {
        "mug",      "cup",    "bottle", "pen",    "pencil", "book",  "notebook",
        "bowl",     "plate",  "phone",  "remote", "stapler", "scissors", "tape",
        "marker",   "eraser", "apple",  "banana", "candle", "clock"};
    return v;
}

const std::vector<std::string>& colors() {
    static const std::vector<std::string> v = {"red",    "blue",  "green", "yellow",
                                               "black",  "white", "orange", "purple",
                                               "pink",   "brown"};
    return v;
}

const std::vector<std::string>& materials() {
    static const std::vector<std::string> v = {"ceramic", "plastic", "metal", "glass",
                                               "wood",    "paper",   "rubber", "fabric"};
    return v;
}

const std::vector<std::string>& shapes() {
    static const std::vector<std::string> v = {"round",       "square",   "cylindrical",
                                               "rectangular", "oval",     "hexagonal"};
    return v;
}

Vec3 category_half_extent(const std::string& category) {
    static const std::map<std::string, Vec3> sizes = {
        {"mug", {0.045, 0.050, 0.045}},    {"cup", {0.040, 0.045, 0.040}},
        {"bottle", {0.035, 0.110, 0.035}}, {"pen", {0.070, 0.008, 0.008}},
        {"pencil", {0.070, 0.007, 0.007}}, {"book", {0.090, 0.015, 0.120}},
        {"notebook", {0.080, 0.010, 0.110}}, {"bowl", {0.070, 0.035, 0.070}},
        {"plate", {0.090, 0.012, 0.090}},  {"phone", {0.035, 0.010, 0.070}},
        {"remote", {0.025, 0.012, 0.080}}, {"stapler", {0.030, 0.020, 0.060}},
        {"scissors", {0.035, 0.010, 0.080}}, {"tape", {0.040, 0.020, 0.040}},
        {"marker", {0.060, 0.010, 0.010}}, {"eraser", {0.020, 0.012, 0.030}},
        {"apple", {0.040, 0.040, 0.040}},  {"banana", {0.080, 0.020, 0.030}},
        {"candle", {0.030, 0.060, 0.030}}, {"clock", {0.060, 0.060, 0.020}},
    };
    auto it = sizes.find(category);
    return it != sizes.end() ? it->second : Vec3{0.05, 0.05, 0.05};
}

std::pair<std::string, std::string> category_state_pair(const std::string& category) {
    static const std::vector<std::string> fillable = {"mug", "cup", "bottle", "bowl"};
    static const std::vector<std::string> openable = {"book", "notebook", "stapler"};
    if (std::find(fillable.begin(), fillable.end(), category) != fillable.end())
        return {"full", "empty"};
    if (std::find(openable.begin(), openable.end(), category) != openable.end())
        return {"open", "closed"};
    return {"new", "used"};
}

std::string opposite_state(const std::string& value) {
    static const std::map<std::string, std::string> opp = {
        {"full", "empty"},  {"empty", "full"},  {"open", "closed"},
        {"closed", "open"}, {"new", "used"},    {"used", "new"}};
    auto it = opp.find(value);
    return it != opp.end() ? it->second : std::string{};
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& affordance_goals() {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> table = {
        {"drink some water", {"mug", "cup", "bottle"}},
        {"write a quick note", {"pen", "pencil", "marker"}},
        {"read a few pages", {"book", "notebook"}},
        {"eat a snack", {"apple", "banana"}},
        {"check the time", {"clock", "phone"}},
        {"cut some paper", {"scissors"}},
        {"mend a torn page", {"tape"}},
        {"fasten some pages", {"stapler"}},
        {"erase a pencil mark", {"eraser"}},
        {"call a friend", {"phone"}},
        {"change the channel", {"remote"}},
        {"serve some soup", {"bowl"}},
        {"plate a meal", {"plate"}},
        {"add a warm glow", {"candle"}},
    };
    return table;
}

std::vector<std::string> goals_suiting(const std::string& category) {
    std::vector<std::string> out;
    for (const auto& [goal, cats] : affordance_goals()) {
        if (std::find(cats.begin(), cats.end(), category) != cats.end()) out.push_back(goal);
    }
    return out;
}

std::vector<std::string> goals_not_suiting(const std::string& category) {
    std::vector<std::string> out;
    for (const auto& [goal, cats] : affordance_goals()) {
        if (std::find(cats.begin(), cats.end(), category) == cats.end()) out.push_back(goal);
    }
    return out;
}

} // namespace deixis::vocab
