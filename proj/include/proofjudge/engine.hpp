#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "proofjudge/backends.hpp"
#include "proofjudge/dataset.hpp"
#include "proofjudge/prompts.hpp"
#include "proofjudge/verdict.hpp"

namespace proofjudge {

/// One prompt and how many independent calls it contributes per record.
struct CallSpec {
    std::string prompt_id;
    int num_calls = 1;
};

/// The call schedule of a judging run. The shipped paper ensemble is 12
/// calls over 8 prompts: the general grading prompt x5 plus 7 specialists.
struct EnsemblePlan {
    std::vector<CallSpec> calls;

    int total_calls() const;
    /// Throws ConfigError on empty plans, duplicate prompt ids, or
    /// non-positive call counts.
    void validate() const;
};

/// One model verdict for (record, prompt, replicate, call).
struct JudgmentRecord {
    std::string record_id;
    std::string prompt_id;
    int replicate = 0;
    int call_index = 0;
    Verdict verdict = Verdict::Unparseable;
    std::string raw_ref;  // sha256 of the raw response text; empty if failed
    long prompt_tokens = 0;
    long completion_tokens = 0;
    bool failed = false;  // permanent backend failure; implies Unparseable
};

struct RunOptions {
    int replicates = 1;
    int parallelism = 1;
    /// Response cache directory; empty disables caching.
    std::filesystem::path cache_dir;
    /// Fresh-sample retries when a response has no parseable verdict.
    int unparseable_retries = 1;
    /// Used only to hand the simulator backend each record's ground truth.
    LabelPolicy label_policy;
};

/// Stable cache key; any field change (including replicate/call_index, so
/// repeated samples stay distinct) changes the key.
std::string cache_key(const std::string& model_id, const std::string& prompt_id,
                      const std::string& record_id, int replicate, int call_index,
                      double temperature, ReasoningEffort reasoning);

/// Raw response text stored under a cache key, if present.
std::optional<std::string> cached_response_text(const std::filesystem::path& cache_dir,
                                                const std::string& model_id,
                                                const std::string& key);

/// Executes plan x records x replicates against a backend with bounded
/// concurrency and a content-addressed response cache.
///
/// Always returns exactly |records| * plan.total_calls() * replicates
/// judgments, sorted by (record_id, prompt_id, replicate, call_index).
/// Cached responses are served without backend calls and re-parsed on read.
/// A call that fails permanently yields a judgment with failed=true rather
/// than aborting the run; failures are not cached, so a re-run retries them.
std::vector<JudgmentRecord> execute(const EnsemblePlan& plan,
                                    const std::vector<ProofRecord>& records,
                                    const PromptBundle& bundle, JudgeBackend& backend,
                                    const RunOptions& options);

}  // namespace proofjudge
