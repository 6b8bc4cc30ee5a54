#include "proofjudge/backends.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "proofjudge/errors.hpp"
#include "proofjudge/jsonl.hpp"
#include "proofjudge/sha256.hpp"

namespace proofjudge {

namespace {

using Clock = std::chrono::steady_clock;

// Unit separator keeps hash inputs unambiguous when ids contain delimiters.
constexpr char kSep = '\x1f';

double unit_interval(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double jitter_draw() {
    thread_local std::mt19937_64 rng(std::random_device{}());
    return unit_interval(rng());
}

bool transient_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

// Splits "https://host:port/v1" into client target and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("base_url must include a scheme: " + base_url);
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {base_url, ""};
    }
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

}  // namespace

std::string to_string(ReasoningEffort effort) {
    switch (effort) {
        case ReasoningEffort::None: return "none";
        case ReasoningEffort::Low: return "low";
        case ReasoningEffort::High: return "high";
    }
    return "none";
}

ReasoningEffort reasoning_effort_from_string(const std::string& s) {
    if (s == "none") return ReasoningEffort::None;
    if (s == "low") return ReasoningEffort::Low;
    if (s == "high") return ReasoningEffort::High;
    throw ConfigError("unknown reasoning effort: " + s);
}

std::string CallKey::describe() const {
    std::ostringstream out;
    out << "(record " << record_id << ", prompt " << prompt_id << ", replicate "
        << replicate << ", call " << call_index << ")";
    return out.str();
}

long backoff_delay_ms(long base_ms, int attempt, double jitter_u) {
    double delay = static_cast<double>(base_ms) * std::pow(2.0, attempt - 1);
    double factor = 0.8 + 0.4 * jitter_u;  // +/-20%
    return std::lround(delay * factor);
}

// ---------------------------------------------------------------------------
// HTTP chat-completions backend
// ---------------------------------------------------------------------------

QueryResult complete(const ModelEndpoint& endpoint, const std::string& message,
                     const std::string& idempotency_key) {
    auto [target, prefix] = split_base_url(endpoint.base_url);
    std::string path = prefix + "/chat/completions";

    nlohmann::json body = {
        {"model", endpoint.model_id},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", message}}})},
        {"temperature", endpoint.temperature},
        {"max_tokens", endpoint.max_tokens},
    };
    if (endpoint.reasoning_effort != ReasoningEffort::None) {
        body["reasoning_effort"] = to_string(endpoint.reasoning_effort);
    }
    std::string payload = body.dump();

    httplib::Headers headers;
    if (!endpoint.auth_env_var.empty()) {
        const char* token = std::getenv(endpoint.auth_env_var.c_str());
        if (!token) {
            throw ConfigError("auth env var " + endpoint.auth_env_var + " is not set");
        }
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    if (!idempotency_key.empty()) {
        headers.emplace("Idempotency-Key", idempotency_key);
    }

    auto start = Clock::now();
    int last_status = 0;
    std::string last_error;
    for (int attempt = 1; attempt <= endpoint.max_attempts; ++attempt) {
        httplib::Client client(target);
        client.set_connection_timeout(15, 0);
        client.set_read_timeout(600, 0);
        client.set_write_timeout(60, 0);

        auto res = client.Post(path, headers, payload, "application/json");
        auto elapsed = [&] {
            return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start)
                .count();
        };

        if (!res) {
            last_status = 0;
            last_error = "transport error: " + httplib::to_string(res.error());
        } else if (res->status >= 200 && res->status < 300) {
            if (res->body.empty()) {
                throw BackendError("empty response body from " + endpoint.base_url,
                                   res->status);
            }
            nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
            if (parsed.is_discarded()) {
                throw BackendError("malformed JSON response from " + endpoint.base_url,
                                   res->status);
            }
            std::string text;
            try {
                text = parsed.at("choices").at(0).at("message").at("content")
                           .get<std::string>();
            } catch (const nlohmann::json::exception&) {
                throw BackendError("response has no choices[0].message.content",
                                   res->status);
            }
            QueryResult result;
            result.text = std::move(text);
            result.attempts = attempt;
            result.latency_ms = elapsed();
            if (parsed.contains("usage")) {
                result.prompt_tokens = parsed["usage"].value("prompt_tokens", 0L);
                result.completion_tokens = parsed["usage"].value("completion_tokens", 0L);
            }
            return result;
        } else if (transient_status(res->status)) {
            last_status = res->status;
            last_error = "HTTP " + std::to_string(res->status);
        } else {
            throw BackendError("non-transient HTTP " + std::to_string(res->status) +
                                   " from " + endpoint.base_url + ": " + res->body,
                               res->status);
        }

        if (attempt < endpoint.max_attempts) {
            long delay = backoff_delay_ms(endpoint.backoff_base_ms, attempt, jitter_draw());
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
    }
    throw BackendError("permanent failure after " + std::to_string(endpoint.max_attempts) +
                           " attempts (" + last_error + ")",
                       last_status);
}

/// Token bucket throttle; permits refill continuously at requests/minute.
class HttpChatBackend::RateLimiter {
public:
    explicit RateLimiter(int requests_per_minute)
        : rate_per_sec_(requests_per_minute / 60.0),
          capacity_(static_cast<double>(requests_per_minute)),
          tokens_(static_cast<double>(requests_per_minute)),
          last_(Clock::now()) {}

    void acquire() {
        std::unique_lock<std::mutex> lock(mutex_);
        for (;;) {
            refill();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            double need_sec = (1.0 - tokens_) / rate_per_sec_;
            auto wait = std::chrono::duration<double>(need_sec);
            cv_.wait_for(lock, wait);
        }
    }

private:
    void refill() {
        auto now = Clock::now();
        double dt = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + dt * rate_per_sec_);
    }

    double rate_per_sec_;
    double capacity_;
    double tokens_;
    Clock::time_point last_;
    std::mutex mutex_;
    std::condition_variable cv_;
};

HttpChatBackend::HttpChatBackend(ModelEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    if (endpoint_.requests_per_minute > 0) {
        limiter_ = std::make_unique<RateLimiter>(endpoint_.requests_per_minute);
    }
}

HttpChatBackend::~HttpChatBackend() = default;

void HttpChatBackend::validate() const {
    if (endpoint_.base_url.empty()) throw ConfigError("endpoint base_url is empty");
    if (endpoint_.model_id.empty()) throw ConfigError("endpoint model_id is empty");
    if (endpoint_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    if (endpoint_.temperature < 0) throw ConfigError("temperature must be >= 0");
    if (endpoint_.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
    if (endpoint_.backoff_base_ms < 1) throw ConfigError("backoff_base_ms must be >= 1");
    split_base_url(endpoint_.base_url);
    if (!endpoint_.auth_env_var.empty() &&
        std::getenv(endpoint_.auth_env_var.c_str()) == nullptr) {
        throw ConfigError("auth env var " + endpoint_.auth_env_var + " is not set");
    }
}

QueryResult HttpChatBackend::query(const CallContext& ctx, const std::string& message) {
    if (limiter_) limiter_->acquire();
    // Salt keeps retried samples distinct on providers that deduplicate by
    // idempotency key.
    std::string idem = ctx.key.record_id;
    idem += kSep;
    idem += ctx.key.prompt_id;
    idem += kSep;
    idem += std::to_string(ctx.key.replicate);
    idem += kSep;
    idem += std::to_string(ctx.key.call_index);
    idem += kSep;
    idem += std::to_string(ctx.sample_salt);
    return complete(endpoint_, message, sha256_hex(idem));
}

// ---------------------------------------------------------------------------
// Scripted backend
// ---------------------------------------------------------------------------

QueryResult scripted_complete(const FixtureMap& fixtures, const CallKey& key) {
    auto it = fixtures.find(std::make_tuple(key.record_id, key.prompt_id, key.replicate,
                                            key.call_index));
    if (it == fixtures.end()) {
        throw BackendError("no fixture for " + key.describe());
    }
    QueryResult result;
    result.text = it->second;
    result.attempts = 1;
    result.latency_ms = 0;
    return result;
}

ScriptedBackend::ScriptedBackend(FixtureMap fixtures, std::string model_id)
    : fixtures_(std::move(fixtures)), model_id_(std::move(model_id)) {}

ScriptedBackend ScriptedBackend::from_jsonl(const std::filesystem::path& path,
                                            std::string model_id) {
    FixtureMap fixtures;
    for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& obj) {
        auto key = std::make_tuple(obj.at("record_id").get<std::string>(),
                                   obj.at("prompt_id").get<std::string>(),
                                   obj.value("replicate", 0), obj.value("call_index", 0));
        if (!fixtures.emplace(key, obj.at("text").get<std::string>()).second) {
            throw DataError(path.filename().string() + " line " + std::to_string(line_no) +
                            ": duplicate fixture key");
        }
    });
    return ScriptedBackend(std::move(fixtures), std::move(model_id));
}

QueryResult ScriptedBackend::query(const CallContext& ctx, const std::string&) {
    return scripted_complete(fixtures_, ctx.key);
}

// ---------------------------------------------------------------------------
// Simulated judge
// ---------------------------------------------------------------------------

std::string simulate_judge(const SimulatedJudgeParams& params, const std::string& record_id,
                           bool record_label, std::int64_t draw_index) {
    std::string input = std::to_string(params.seed);
    input += kSep;
    input += record_id;
    input += kSep;
    input += std::to_string(draw_index);
    double u = unit_interval(stable_hash64(input));

    bool verdict_correct;
    if (record_label) {
        verdict_correct = u < params.tnr;  // true negative: accept a correct proof
    } else {
        verdict_correct = !(u < params.tpr);  // true positive: reject an incorrect proof
    }
    return verdict_correct ? "\\boxed{CORRECT}" : "\\boxed{INCORRECT}";
}

SimulatorBackend::SimulatorBackend(SimulatedJudgeParams params) : params_(params) {
    if (params_.tpr < 0 || params_.tpr > 1 || params_.tnr < 0 || params_.tnr > 1) {
        throw ConfigError("simulator tpr/tnr must lie in [0,1]");
    }
}

std::string SimulatorBackend::model_id() const {
    std::ostringstream out;
    out << "simulator-tpr" << params_.tpr << "-tnr" << params_.tnr << "-seed" << params_.seed;
    return out.str();
}

QueryResult SimulatorBackend::query(const CallContext& ctx, const std::string&) {
    if (!ctx.record_label) {
        throw BackendError("simulator needs a ground-truth label for record " +
                           ctx.key.record_id);
    }
    // Distinct draws per (prompt, replicate, call, salt); order-independent.
    std::string draw_input = ctx.key.prompt_id;
    draw_input += kSep;
    draw_input += std::to_string(ctx.key.replicate);
    draw_input += kSep;
    draw_input += std::to_string(ctx.key.call_index);
    draw_input += kSep;
    draw_input += std::to_string(ctx.sample_salt);
    auto draw_index = static_cast<std::int64_t>(stable_hash64(draw_input));

    QueryResult result;
    result.text = simulate_judge(params_, ctx.key.record_id, *ctx.record_label, draw_index);
    result.attempts = 1;
    return result;
}

}  // namespace proofjudge
