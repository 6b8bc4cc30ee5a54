#include "proofjudge/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "proofjudge/errors.hpp"
#include "proofjudge/jsonl.hpp"
#include "proofjudge/sha256.hpp"

namespace proofjudge {

namespace {

constexpr char kSep = '\x1f';

struct Task {
    const ProofRecord* record;
    const PromptSpec* prompt;
    int replicate;
    int call_index;
    std::optional<bool> label;
};

std::string format_temperature(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", t);
    return buf;
}

std::filesystem::path cache_path(const std::filesystem::path& cache_dir,
                                 const std::string& model_id, const std::string& key) {
    // Model ids may contain path separators (e.g. "org/model").
    std::string safe_model = model_id;
    for (char& c : safe_model) {
        if (c == '/' || c == '\\' || c == ':') c = '_';
    }
    return cache_dir / safe_model / key.substr(0, 2) / (key + ".json");
}

std::optional<QueryResult> cache_read(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    nlohmann::json entry = nlohmann::json::parse(read_file(path), nullptr, false);
    if (entry.is_discarded() || !entry.contains("text")) {
        // A torn or foreign file; treat as a miss and let the run overwrite it.
        return std::nullopt;
    }
    QueryResult result;
    result.text = entry.at("text").get<std::string>();
    result.prompt_tokens = entry.value("prompt_tokens", 0L);
    result.completion_tokens = entry.value("completion_tokens", 0L);
    result.latency_ms = entry.value("latency_ms", 0L);
    result.attempts = entry.value("attempts", 1);
    return result;
}

void cache_write(const std::filesystem::path& path, const QueryResult& result,
                 int sample_salt) {
    std::filesystem::create_directories(path.parent_path());
    nlohmann::json entry = {
        {"text", result.text},
        {"prompt_tokens", result.prompt_tokens},
        {"completion_tokens", result.completion_tokens},
        {"latency_ms", result.latency_ms},
        {"attempts", result.attempts},
        {"sample_salt", sample_salt},
    };
    write_file_atomic(path, entry.dump());
}

}  // namespace

int EnsemblePlan::total_calls() const {
    int total = 0;
    for (const auto& call : calls) total += call.num_calls;
    return total;
}

void EnsemblePlan::validate() const {
    if (calls.empty()) throw ConfigError("plan has no calls");
    std::set<std::string> ids;
    for (const auto& call : calls) {
        if (call.prompt_id.empty()) throw ConfigError("plan call with empty prompt id");
        if (call.num_calls < 1) {
            throw ConfigError("plan call " + call.prompt_id + " has num_calls < 1");
        }
        if (!ids.insert(call.prompt_id).second) {
            throw ConfigError("duplicate prompt id in plan: " + call.prompt_id);
        }
    }
}

std::string cache_key(const std::string& model_id, const std::string& prompt_id,
                      const std::string& record_id, int replicate, int call_index,
                      double temperature, ReasoningEffort reasoning) {
    std::string input;
    input += model_id;
    input += kSep;
    input += prompt_id;
    input += kSep;
    input += record_id;
    input += kSep;
    input += std::to_string(replicate);
    input += kSep;
    input += std::to_string(call_index);
    input += kSep;
    input += format_temperature(temperature);
    input += kSep;
    input += to_string(reasoning);
    return sha256_hex(input);
}

std::optional<std::string> cached_response_text(const std::filesystem::path& cache_dir,
                                                const std::string& model_id,
                                                const std::string& key) {
    auto result = cache_read(cache_path(cache_dir, model_id, key));
    if (!result) return std::nullopt;
    return std::move(result->text);
}

std::vector<JudgmentRecord> execute(const EnsemblePlan& plan,
                                    const std::vector<ProofRecord>& records,
                                    const PromptBundle& bundle, JudgeBackend& backend,
                                    const RunOptions& options) {
    plan.validate();
    if (options.replicates < 1) throw ConfigError("replicates must be >= 1");
    if (options.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (options.unparseable_retries < 0) {
        throw ConfigError("unparseable_retries must be >= 0");
    }
    backend.validate();

    // Resolve every prompt id up front so configuration errors surface
    // before any query is issued.
    std::vector<const PromptSpec*> prompts;
    prompts.reserve(plan.calls.size());
    for (const auto& call : plan.calls) {
        prompts.push_back(&bundle.get(call.prompt_id));
    }

    const bool caching = !options.cache_dir.empty();
    if (caching) {
        std::error_code ec;
        std::filesystem::create_directories(options.cache_dir, ec);
        if (ec || !std::filesystem::is_directory(options.cache_dir)) {
            throw ConfigError("cache directory not writable: " +
                              options.cache_dir.string());
        }
    }

    std::vector<Task> tasks;
    tasks.reserve(records.size() * static_cast<std::size_t>(plan.total_calls()) *
                  static_cast<std::size_t>(options.replicates));
    for (const auto& record : records) {
        std::optional<bool> label;
        if (record.human_label || record.human_score) {
            label = derive_label(record, options.label_policy);
        }
        for (std::size_t c = 0; c < plan.calls.size(); ++c) {
            for (int k = 0; k < plan.calls[c].num_calls; ++k) {
                for (int rep = 0; rep < options.replicates; ++rep) {
                    tasks.push_back(Task{&record, prompts[c], rep, k, label});
                }
            }
        }
    }

    std::vector<JudgmentRecord> output(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= tasks.size()) return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) return;
            }
            const Task& task = tasks[i];

            JudgmentRecord judgment;
            judgment.record_id = task.record->id;
            judgment.prompt_id = task.prompt->id;
            judgment.replicate = task.replicate;
            judgment.call_index = task.call_index;

            try {
                std::string key =
                    cache_key(backend.model_id(), task.prompt->id, task.record->id,
                              task.replicate, task.call_index, backend.temperature(),
                              backend.reasoning());
                std::filesystem::path entry_path;
                std::optional<QueryResult> result;
                if (caching) {
                    entry_path = cache_path(options.cache_dir, backend.model_id(), key);
                    result = cache_read(entry_path);
                }

                if (!result) {
                    CallContext ctx;
                    ctx.key = {task.record->id, task.prompt->id, task.replicate,
                               task.call_index};
                    ctx.record_label = task.label;
                    std::string message = render(*task.prompt, *task.record);
                    try {
                        for (int salt = 0;; ++salt) {
                            ctx.sample_salt = salt;
                            result = backend.query(ctx, message);
                            if (parse_verdict(result->text) != Verdict::Unparseable ||
                                salt >= options.unparseable_retries) {
                                break;
                            }
                        }
                    } catch (const BackendError&) {
                        judgment.failed = true;
                        judgment.verdict = Verdict::Unparseable;
                        output[i] = std::move(judgment);
                        continue;
                    }
                    if (caching) cache_write(entry_path, *result, ctx.sample_salt);
                }

                judgment.verdict = parse_verdict(result->text);
                judgment.raw_ref = sha256_hex(result->text);
                judgment.prompt_tokens = result->prompt_tokens;
                judgment.completion_tokens = result->completion_tokens;
                output[i] = std::move(judgment);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::size_t n_workers = std::min<std::size_t>(
        static_cast<std::size_t>(options.parallelism), std::max<std::size_t>(tasks.size(), 1));
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(worker);
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);

    std::sort(output.begin(), output.end(), [](const JudgmentRecord& a, const JudgmentRecord& b) {
        return std::tie(a.record_id, a.prompt_id, a.replicate, a.call_index) <
               std::tie(b.record_id, b.prompt_id, b.replicate, b.call_index);
    });
    return output;
}

}  // namespace proofjudge
