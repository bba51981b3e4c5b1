#pragma once

#include <memory>
#include <string>

#include "deixis/qa.hpp"

namespace deixis {

struct RephraserConfig {
    std::string endpoint = "http://127.0.0.1:8080"; // host:port base
    double timeout_s = 5.0;
    int retries = 2;
    int max_inflight = 4;
};

/// POSTs /rephrase with {structured_question, options, target_placeholders}
/// and expects {question} back. Bounded retries; throws RephraserUnavailable
/// once they are exhausted.
class HttpRephraser : public Rephraser {
public:
    explicit HttpRephraser(RephraserConfig config);
    ~HttpRephraser() override;

    std::string rephrase(const std::string& structured_question,
                         const std::vector<std::string>& options,
                         const std::vector<std::string>& placeholders) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace deixis
