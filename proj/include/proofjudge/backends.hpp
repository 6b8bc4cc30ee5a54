#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>

namespace proofjudge {

enum class ReasoningEffort { None, Low, High };

std::string to_string(ReasoningEffort effort);
ReasoningEffort reasoning_effort_from_string(const std::string& s);

/// An OpenAI-compatible chat-completions endpoint.
struct ModelEndpoint {
    std::string base_url;  // e.g. "https://api.example.com/v1"
    std::string model_id;
    ReasoningEffort reasoning_effort = ReasoningEffort::None;
    double temperature = 1.0;
    int max_tokens = 16384;
    std::string auth_env_var;  // empty = no Authorization header
    int max_attempts = 4;
    int backoff_base_ms = 250;
    int requests_per_minute = 0;  // 0 = unthrottled
};

struct QueryResult {
    std::string text;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    long latency_ms = 0;
    int attempts = 1;
};

/// Identifies one judge call within a run.
struct CallKey {
    std::string record_id;
    std::string prompt_id;
    int replicate = 0;
    int call_index = 0;

    auto tie() const { return std::tie(record_id, prompt_id, replicate, call_index); }
    bool operator<(const CallKey& o) const { return tie() < o.tie(); }
    bool operator==(const CallKey& o) const { return tie() == o.tie(); }
    std::string describe() const;
};

/// Call metadata passed to backends. The scripted backend resolves fixtures
/// by key; the simulator derives its random draw from key + sample_salt and
/// needs the record's ground-truth label.
struct CallContext {
    CallKey key;
    std::optional<bool> record_label;
    int sample_salt = 0;  // bumped for fresh samples on unparseable retries
};

/// Uniform judge-query interface over HTTP, scripted, and simulated judges.
class JudgeBackend {
public:
    virtual ~JudgeBackend() = default;

    virtual QueryResult query(const CallContext& ctx, const std::string& message) = 0;

    /// Identifier used in cache keys and reports.
    virtual std::string model_id() const = 0;

    /// Sampling parameters, folded into cache keys.
    virtual double temperature() const { return 0.0; }
    virtual ReasoningEffort reasoning() const { return ReasoningEffort::None; }

    /// Configuration check run before any query is issued.
    virtual void validate() const {}
};

/// Backoff delay before retry attempt `attempt` (1-based counting of the
/// attempt that failed): base * 2^(attempt-1), jittered by +/-20%.
/// `jitter_u` must lie in [0,1).
long backoff_delay_ms(long base_ms, int attempt, double jitter_u);

/// One-shot completion against an OpenAI-compatible endpoint with retry on
/// transient failures (connection errors, timeouts, HTTP 429/5xx). 400/401/403
/// and other non-transient 4xx fail immediately. Throws BackendError.
QueryResult complete(const ModelEndpoint& endpoint, const std::string& message,
                     const std::string& idempotency_key);

class HttpChatBackend : public JudgeBackend {
public:
    explicit HttpChatBackend(ModelEndpoint endpoint);
    ~HttpChatBackend() override;

    QueryResult query(const CallContext& ctx, const std::string& message) override;
    std::string model_id() const override { return endpoint_.model_id; }
    double temperature() const override { return endpoint_.temperature; }
    ReasoningEffort reasoning() const override { return endpoint_.reasoning_effort; }
    void validate() const override;

private:
    ModelEndpoint endpoint_;
    class RateLimiter;
    std::unique_ptr<RateLimiter> limiter_;
};

/// Fixture map for the scripted backend: (record_id, prompt_id, replicate,
/// call_index) -> canned response text.
using FixtureMap = std::map<std::tuple<std::string, std::string, int, int>, std::string>;

/// Canned-response lookup; throws BackendError naming the key when missing.
QueryResult scripted_complete(const FixtureMap& fixtures, const CallKey& key);

/// Deterministic test double driven by a fixture map.
class ScriptedBackend : public JudgeBackend {
public:
    explicit ScriptedBackend(FixtureMap fixtures, std::string model_id = "scripted");

    /// Loads fixtures from JSONL rows of
    /// {record_id, prompt_id, replicate, call_index, text}.
    static ScriptedBackend from_jsonl(const std::filesystem::path& path,
                                      std::string model_id = "scripted");

    QueryResult query(const CallContext& ctx, const std::string& message) override;
    std::string model_id() const override { return model_id_; }

private:
    FixtureMap fixtures_;
    std::string model_id_;
};

/// Stochastic judge model: tpr = P(verdict Incorrect | proof incorrect),
/// tnr = P(verdict Correct | proof correct).
struct SimulatedJudgeParams {
    double tpr = 1.0;
    double tnr = 1.0;
    std::uint64_t seed = 0;
};

/// Emits "\boxed{CORRECT}" or "\boxed{INCORRECT}" for one simulated judge
/// call. Counter-based: the draw is a pure function of (seed, record_id,
/// draw_index), so results are replayable and independent of call order.
std::string simulate_judge(const SimulatedJudgeParams& params, const std::string& record_id,
                           bool record_label, std::int64_t draw_index);

class SimulatorBackend : public JudgeBackend {
public:
    explicit SimulatorBackend(SimulatedJudgeParams params);

    QueryResult query(const CallContext& ctx, const std::string& message) override;
    std::string model_id() const override;

    const SimulatedJudgeParams& params() const { return params_; }

private:
    SimulatedJudgeParams params_;
};

/// Decorator counting backend calls; used to verify cache hits and resume.
class CountingBackend : public JudgeBackend {
public:
    explicit CountingBackend(JudgeBackend& inner) : inner_(inner) {}

    QueryResult query(const CallContext& ctx, const std::string& message) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_.query(ctx, message);
    }
    std::string model_id() const override { return inner_.model_id(); }
    double temperature() const override { return inner_.temperature(); }
    ReasoningEffort reasoning() const override { return inner_.reasoning(); }
    void validate() const override { inner_.validate(); }

    long calls() const { return calls_.load(std::memory_order_relaxed); }

private:
    JudgeBackend& inner_;
    std::atomic<long> calls_{0};
};

}  // namespace proofjudge
