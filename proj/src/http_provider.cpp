#include <httplib.h>
#include <json.hpp>

#include "setplan/error.hpp"
#include "setplan/golden_library.hpp"

namespace setplan::library {

using nlohmann::json;

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpProviderConfig config)
    : config_(std::move(config)) {
    if (config_.url.empty())
        throw Error(ErrorKind::Config, "embedding provider URL is empty");
    if (config_.dimension <= 0)
        throw Error(ErrorKind::Config, "embedding provider dimension must be positive");
}

std::vector<double> HttpEmbeddingProvider::embed(const std::string& text) const {
    // Split scheme://host:port from the path.
    std::string url = config_.url;
    std::string path = "/embed";
    auto scheme_end = url.find("://");
    auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start != std::string::npos) {
        path = url.substr(path_start);
        url = url.substr(0, path_start);
    }

    json body;
    body["texts"] = json::array({text});

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        httplib::Client client(url);
        client.set_connection_timeout(config_.timeout_ms / 1000,
                                      (config_.timeout_ms % 1000) * 1000);
        client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
        httplib::Headers headers;
        if (!config_.auth_token.empty())
            headers.emplace("Authorization", "Bearer " + config_.auth_token);

        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "connection failed";
            continue;
        }
        if (res->status != 200) {
            last_error = "status " + std::to_string(res->status);
            continue;
        }
        try {
            json parsed = json::parse(res->body);
            auto vec = parsed.at("embeddings").at(0).get<std::vector<double>>();
            if (static_cast<int>(vec.size()) != config_.dimension)
                throw Error(ErrorKind::Provider, "provider returned wrong dimension");
            return vec;
        } catch (const json::exception& e) {
            last_error = std::string("bad response: ") + e.what();
        }
    }
    throw Error(ErrorKind::Provider, "embedding provider failed: " + last_error);
}

}  // namespace setplan::library
