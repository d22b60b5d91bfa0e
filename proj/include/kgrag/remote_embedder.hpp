#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgrag/embed.hpp"
#include "kgrag/error.hpp"
#include "kgrag/http.hpp"

namespace kgrag {

/**
 * Client for an embeddings endpoint speaking
 *   request:  {"input": [text, ...]}
 *   response: {"data": [{"index": i, "embedding": [float, ...]}, ...]}
 * The first response fixes the dimension; later responses must match it.
 */
class RemoteEmbedder final : public EmbeddingProvider {
public:
    RemoteEmbedder(std::string url, std::string token = {})
        : endpoint_(parse_endpoint(url)), token_(std::move(token)) {}

    std::size_t dimension() const override { return dimension_.load(); }
    std::string name() const override { return "remote:" + endpoint_.url; }

    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override {
        if (texts.empty()) return {};
        nlohmann::json request = {{"input", nlohmann::json::array()}};
        for (const auto& t : texts) request["input"].push_back(t);

        const HttpResponse response = post_json(endpoint_, request.dump(), token_);
        if (!is_success(response.status)) {
            throw Error(ErrorKind::backend_error, endpoint_.url,
                        "HTTP " + std::to_string(response.status) + ": " + response.body);
        }
        return decode(response.body, texts.size());
    }

    std::vector<EmbeddingVector> decode(const std::string& body, std::size_t expected) const {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(body);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::protocol_error, endpoint_.url, e.what());
        }
        if (!doc.is_object() || !doc.contains("data") || !doc["data"].is_array()) {
            throw Error(ErrorKind::protocol_error, endpoint_.url, "missing \"data\" array");
        }
        const auto& data = doc["data"];
        if (data.size() != expected) {
            throw Error(ErrorKind::protocol_error, endpoint_.url,
                        "expected " + std::to_string(expected) + " embeddings, got " +
                            std::to_string(data.size()));
        }

        std::vector<EmbeddingVector> out(expected);
        std::vector<bool> filled(expected, false);
        for (const auto& item : data) {
            if (!item.is_object() || !item.contains("index") || !item["index"].is_number_integer() ||
                !item.contains("embedding") || !item["embedding"].is_array()) {
                throw Error(ErrorKind::protocol_error, endpoint_.url,
                            "each item needs integer \"index\" and array \"embedding\"");
            }
            const auto index = item["index"].get<long long>();
            if (index < 0 || static_cast<std::size_t>(index) >= expected ||
                filled[static_cast<std::size_t>(index)]) {
                throw Error(ErrorKind::protocol_error, endpoint_.url,
                            "bad or repeated index " + std::to_string(index));
            }
            std::vector<float> raw;
            raw.reserve(item["embedding"].size());
            for (const auto& v : item["embedding"]) {
                if (!v.is_number()) {
                    throw Error(ErrorKind::protocol_error, endpoint_.url, "non-numeric embedding value");
                }
                raw.push_back(v.get<float>());
            }
            check_dimension(raw.size());
            out[static_cast<std::size_t>(index)] = normalize(std::move(raw));
            filled[static_cast<std::size_t>(index)] = true;
        }
        return out;
    }

private:
    void check_dimension(std::size_t d) const {
        if (d == 0) throw Error(ErrorKind::protocol_error, endpoint_.url, "empty embedding");
        std::size_t expected = 0;
        if (dimension_.compare_exchange_strong(expected, d)) return;
        if (expected != d) {
            throw Error(ErrorKind::dimension_mismatch, endpoint_.url,
                        "expected " + std::to_string(expected) + ", got " + std::to_string(d));
        }
    }

    Endpoint endpoint_;
    std::string token_;
    mutable std::atomic<std::size_t> dimension_{0};
};

} // namespace kgrag
