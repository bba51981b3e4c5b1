#pragma once

#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deixis/errors.hpp"

namespace deixis {

/// Parses a JSONL file, reporting the 1-based line number on bad input.
inline std::vector<nlohmann::json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open " + path);
    std::vector<nlohmann::json> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }
    return out;
}

inline void write_jsonl(const std::string& path,
                        const std::vector<nlohmann::json>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoFailure("cannot write " + path);
    for (const auto& r : records) out << r.dump() << '\n';
    if (!out) throw IoFailure("write failed for " + path);
}

/// Streaming variant for large files.
inline void for_each_jsonl(const std::string& path,
                           const std::function<void(const nlohmann::json&, int)>& fn) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            fn(nlohmann::json::parse(line), line_no);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }
}

} // namespace deixis
