#include "deixis/rephraser.hpp"

#include <chrono>
#include <condition_variable>
#include <mutex>

#include <httplib.h>
#include <json.hpp>

namespace deixis {

struct HttpRephraser::Impl {
    RephraserConfig config;
    httplib::Client client;
    std::mutex gate_mutex;
    std::condition_variable gate_cv;
    int inflight = 0;

    explicit Impl(RephraserConfig cfg)
        : config(std::move(cfg)), client(config.endpoint) {
        const auto timeout =
            std::chrono::milliseconds(static_cast<int>(config.timeout_s * 1000));
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
    }
};

HttpRephraser::HttpRephraser(RephraserConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpRephraser::~HttpRephraser() = default;

std::string HttpRephraser::rephrase(const std::string& structured_question,
                                    const std::vector<std::string>& options,
                                    const std::vector<std::string>& placeholders) {
    // bound concurrent requests to max_inflight
    std::unique_lock lock(impl_->gate_mutex);
    impl_->gate_cv.wait(lock, [&] { return impl_->inflight < impl_->config.max_inflight; });
    ++impl_->inflight;
    lock.unlock();

    struct Release {
        Impl* impl;
        ~Release() {
            std::lock_guard lk(impl->gate_mutex);
            --impl->inflight;
            impl->gate_cv.notify_one();
        }
    } release{impl_.get()};

    const nlohmann::json body{{"structured_question", structured_question},
                              {"options", options},
                              {"target_placeholders", placeholders}};
    const std::string payload = body.dump();

    for (int attempt = 0; attempt <= impl_->config.retries; ++attempt) {
        auto res = impl_->client.Post("/rephrase", payload, "application/json");
        if (!res || res->status != 200) continue;
        try {
            const auto j = nlohmann::json::parse(res->body);
            return j.at("question").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            continue;
        }
    }
    throw RephraserUnavailable("no valid response from " + impl_->config.endpoint +
                               " after " + std::to_string(impl_->config.retries + 1) +
                               " attempts");
}

} // namespace deixis
