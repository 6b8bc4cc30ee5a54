#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "proofjudge/backends.hpp"
#include "proofjudge/dataset.hpp"
#include "proofjudge/engine.hpp"
#include "proofjudge/prompts.hpp"

namespace proofjudge {

/// A model-authored description of the reasoning error in a proof that
/// human graders marked incorrect.
struct ErrorAnnotation {
    std::string record_id;
    std::string description;
    std::string annotator_model;
    bool used_reference_solution = false;
    bool used_rubric = false;
};

/// Annotation message: the standard rendering plus REFERENCE SOLUTION and
/// RUBRIC blocks when the record carries them. Byte layout is normative.
std::string render_annotation_message(const PromptSpec& prompt, const ProofRecord& record);

/// Match message: the match prompt body followed by VERIFIER RESPONSE and
/// ANNOTATED ERROR blocks.
std::string render_match_message(const PromptSpec& prompt, const std::string& verifier_response,
                                 const ErrorAnnotation& annotation);

/// Annotates every record (all must be labeled incorrect under `policy`)
/// with the judge model's full response text.
std::vector<ErrorAnnotation> annotate_errors(const std::vector<ProofRecord>& records,
                                             const LabelPolicy& policy, JudgeBackend& backend,
                                             const PromptSpec& annotation_prompt);

/// Asks the judge whether a verifier's rejection identifies the annotated
/// error. The verifier response must itself parse as Incorrect. The judge
/// must answer \boxed{MATCH} or \boxed{NO_MATCH} (last occurrence wins); one
/// fresh-sample retry is made before an unparseable answer becomes an error.
bool match_error(const std::string& verifier_response, const ErrorAnnotation& annotation,
                 JudgeBackend& backend, const PromptSpec& match_prompt);

/// Per-(detection prompt, incorrect record) outcome grid.
/// caught: verdict was Incorrect. matched: caught and match_error true.
struct CoverageMatrix {
    std::vector<std::string> prompts;
    std::vector<std::string> records;
    std::vector<std::vector<bool>> caught;   // [prompt][record]
    std::vector<std::vector<bool>> matched;  // [prompt][record]
};

/// Builds the matrix from a completed detection sweep (R=1, one call per
/// prompt) and the match results keyed by (prompt_id, record_id). A match
/// result for an uncaught pair is rejected as inconsistent input.
CoverageMatrix build_coverage(
    const std::vector<JudgmentRecord>& judgments, const std::vector<std::string>& prompt_ids,
    const std::vector<ErrorAnnotation>& annotations,
    const std::map<std::pair<std::string, std::string>, bool>& match_results);

struct PromptCoverage {
    std::string prompt_id;
    long caught = 0;
    long matched = 0;
    double match_rate_among_caught = 0;  // NaN when nothing was caught
};

/// Coverage statistics plus the uncovered-record feedback list consumed by
/// an external prompt-refinement agent.
struct CoverageReport {
    std::size_t n_prompts = 0;
    std::size_t n_records = 0;
    long union_caught = 0;
    long union_matched = 0;
    double union_caught_rate = 0;
    double union_matched_rate = 0;
    std::vector<PromptCoverage> per_prompt;
    /// disagreement[i][j]: fraction of records where prompts i and j differ
    /// on caught. Symmetric with zero diagonal.
    std::vector<std::vector<double>> disagreement;
    /// Records no prompt matched (caught-but-unmatched ones included).
    std::vector<std::string> uncovered_records;
};

CoverageReport coverage_report(const CoverageMatrix& matrix);

nlohmann::json coverage_report_to_json(const CoverageReport& report);
/// Per-prompt table: prompt,caught,matched,match_rate_among_caught.
std::string coverage_report_csv(const CoverageReport& report);

nlohmann::json annotation_to_json(const ErrorAnnotation& annotation);
ErrorAnnotation annotation_from_json(const nlohmann::json& obj);
std::vector<ErrorAnnotation> load_annotations(const std::filesystem::path& path);
void save_annotations(const std::filesystem::path& path,
                      const std::vector<ErrorAnnotation>& annotations);

}  // namespace proofjudge
