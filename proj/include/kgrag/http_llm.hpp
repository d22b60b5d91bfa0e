#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "kgrag/error.hpp"
#include "kgrag/http.hpp"
#include "kgrag/llm.hpp"

namespace kgrag {

/**
 * Chat-completions client. Sends the rendered prompt as a single user
 * message and returns the first choice's content, trimmed. Transport
 * failures are retried up to twice with the identical request body.
 */
class HttpLlmClient final : public LlmClient {
public:
    static constexpr int kMaxRetries = 2;

    HttpLlmClient(std::string url, std::string token = {}, std::string model = {})
        : endpoint_(parse_endpoint(url)), token_(std::move(token)), model_(std::move(model)) {}

    std::string name() const override { return model_.empty() ? "remote" : model_; }

    nlohmann::ordered_json build_request(const std::string& prompt,
                                         const GenerationParams& params) const {
        nlohmann::ordered_json body;
        if (!model_.empty()) body["model"] = model_;
        body["messages"] = nlohmann::ordered_json::array(
            {nlohmann::ordered_json{{"role", "user"}, {"content", prompt}}});
        body["max_tokens"] = params.max_tokens;
        body["temperature"] = params.temperature;
        body["repetition_penalty"] = params.repetition_penalty;
        if (params.seed) body["seed"] = *params.seed;
        return body;
    }

    std::string generate(const std::string& prompt, const GenerationParams& params) const override {
        params.validate();
        const std::string body = build_request(prompt, params).dump();
        HttpResponse response;
        for (int attempt = 0;; ++attempt) {
            try {
                response = post_json(endpoint_, body, token_);
                break;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::transport_error || attempt >= kMaxRetries) throw;
            }
        }
        if (!is_success(response.status)) {
            throw Error(ErrorKind::backend_error, endpoint_.url,
                        "HTTP " + std::to_string(response.status) + ": " + response.body);
        }
        return trim(strip_echo(prompt, parse_content(response.body)));
    }

    std::string parse_content(const std::string& body) const {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(body);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::protocol_error, endpoint_.url, e.what());
        }
        if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array()) {
            throw Error(ErrorKind::protocol_error, endpoint_.url, "missing \"choices\" array");
        }
        if (doc["choices"].empty()) {
            throw Error(ErrorKind::protocol_error, endpoint_.url, "zero choices");
        }
        const auto& choice = doc["choices"][0];
        if (!choice.is_object() || !choice.contains("message") ||
            !choice["message"].is_object() || !choice["message"].contains("content") ||
            !choice["message"]["content"].is_string()) {
            throw Error(ErrorKind::protocol_error, endpoint_.url,
                        "first choice lacks message.content");
        }
        return trim(choice["message"]["content"].get<std::string>());
    }

private:
    Endpoint endpoint_;
    std::string token_;
    std::string model_;
};

} // namespace kgrag
