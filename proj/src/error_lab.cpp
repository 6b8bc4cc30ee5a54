#include "proofjudge/error_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "proofjudge/errors.hpp"
#include "proofjudge/jsonl.hpp"
#include "proofjudge/verdict.hpp"

namespace proofjudge {

std::string render_annotation_message(const PromptSpec& prompt, const ProofRecord& record) {
    std::string out = render(prompt, record);
    if (record.reference_solution) {
        out += "\n\nREFERENCE SOLUTION\n";
        out += *record.reference_solution;
    }
    if (record.rubric) {
        out += "\n\nRUBRIC\n";
        out += *record.rubric;
    }
    return out;
}

std::string render_match_message(const PromptSpec& prompt, const std::string& verifier_response,
                                 const ErrorAnnotation& annotation) {
    std::string out = prompt.body;
    out += "\n\nVERIFIER RESPONSE\n";
    out += verifier_response;
    out += "\n\nANNOTATED ERROR\n";
    out += annotation.description;
    return out;
}

std::vector<ErrorAnnotation> annotate_errors(const std::vector<ProofRecord>& records,
                                             const LabelPolicy& policy, JudgeBackend& backend,
                                             const PromptSpec& annotation_prompt) {
    for (const auto& record : records) {
        if (derive_label(record, policy)) {
            throw DataError("record " + record.id +
                            " is labeled correct; only incorrect proofs are annotated");
        }
    }
    backend.validate();

    std::vector<ErrorAnnotation> annotations;
    annotations.reserve(records.size());
    for (const auto& record : records) {
        CallContext ctx;
        ctx.key = {record.id, annotation_prompt.id, 0, 0};
        ctx.record_label = false;
        QueryResult result = backend.query(ctx, render_annotation_message(annotation_prompt, record));
        if (result.text.empty()) {
            throw BackendError("empty annotation response for record " + record.id);
        }
        ErrorAnnotation annotation;
        annotation.record_id = record.id;
        annotation.description = result.text;
        annotation.annotator_model = backend.model_id();
        annotation.used_reference_solution = record.reference_solution.has_value();
        annotation.used_rubric = record.rubric.has_value();
        annotations.push_back(std::move(annotation));
    }
    return annotations;
}

bool match_error(const std::string& verifier_response, const ErrorAnnotation& annotation,
                 JudgeBackend& backend, const PromptSpec& match_prompt) {
    if (parse_verdict(verifier_response) != Verdict::Incorrect) {
        throw DataError("match_error: verifier response for record " + annotation.record_id +
                        " is not a rejection; only rejections are matched");
    }
    std::string message = render_match_message(match_prompt, verifier_response, annotation);
    CallContext ctx;
    ctx.key = {annotation.record_id, match_prompt.id, 0, 0};
    ctx.record_label = false;
    for (int salt = 0; salt <= 1; ++salt) {
        ctx.sample_salt = salt;
        QueryResult result = backend.query(ctx, message);
        auto answer = parse_boxed_binary(result.text, "MATCH", "NO_MATCH");
        if (answer) return *answer;
    }
    throw BackendError("unparseable match response for record " + annotation.record_id +
                       " after retry");
}

CoverageMatrix build_coverage(
    const std::vector<JudgmentRecord>& judgments, const std::vector<std::string>& prompt_ids,
    const std::vector<ErrorAnnotation>& annotations,
    const std::map<std::pair<std::string, std::string>, bool>& match_results) {
    CoverageMatrix matrix;
    matrix.prompts = prompt_ids;
    for (const auto& annotation : annotations) {
        matrix.records.push_back(annotation.record_id);
    }

    std::map<std::pair<std::string, std::string>, Verdict> verdicts;
    for (const auto& j : judgments) {
        if (j.replicate != 0 || j.call_index != 0) {
            throw DataError("coverage sweep must be R=1 with one call per prompt; got " +
                            j.record_id + "/" + j.prompt_id + " replicate " +
                            std::to_string(j.replicate) + " call " +
                            std::to_string(j.call_index));
        }
        verdicts[{j.prompt_id, j.record_id}] = j.verdict;
    }

    matrix.caught.assign(prompt_ids.size(), std::vector<bool>(matrix.records.size(), false));
    matrix.matched.assign(prompt_ids.size(), std::vector<bool>(matrix.records.size(), false));
    for (std::size_t p = 0; p < prompt_ids.size(); ++p) {
        for (std::size_t r = 0; r < matrix.records.size(); ++r) {
            auto it = verdicts.find({prompt_ids[p], matrix.records[r]});
            if (it == verdicts.end()) {
                throw DataError("missing judgment for prompt " + prompt_ids[p] +
                                " on record " + matrix.records[r]);
            }
            bool caught = it->second == Verdict::Incorrect;
            matrix.caught[p][r] = caught;

            auto match_it = match_results.find({prompt_ids[p], matrix.records[r]});
            bool matched = match_it != match_results.end() && match_it->second;
            if (matched && !caught) {
                throw DataError("inconsistent input: match result for uncaught pair (" +
                                prompt_ids[p] + ", " + matrix.records[r] + ")");
            }
            matrix.matched[p][r] = matched;
        }
    }
    return matrix;
}

CoverageReport coverage_report(const CoverageMatrix& matrix) {
    const std::size_t n_prompts = matrix.prompts.size();
    const std::size_t n_records = matrix.records.size();
    if (matrix.caught.size() != n_prompts || matrix.matched.size() != n_prompts) {
        throw DataError("coverage matrix dimensions are inconsistent");
    }
    for (std::size_t p = 0; p < n_prompts; ++p) {
        if (matrix.caught[p].size() != n_records || matrix.matched[p].size() != n_records) {
            throw DataError("coverage matrix dimensions are inconsistent");
        }
        for (std::size_t r = 0; r < n_records; ++r) {
            if (matrix.matched[p][r] && !matrix.caught[p][r]) {
                throw DataError("coverage matrix violates matched => caught at (" +
                                matrix.prompts[p] + ", " + matrix.records[r] + ")");
            }
        }
    }

    CoverageReport report;
    report.n_prompts = n_prompts;
    report.n_records = n_records;

    for (std::size_t r = 0; r < n_records; ++r) {
        bool any_caught = false, any_matched = false;
        for (std::size_t p = 0; p < n_prompts; ++p) {
            any_caught = any_caught || matrix.caught[p][r];
            any_matched = any_matched || matrix.matched[p][r];
        }
        if (any_caught) ++report.union_caught;
        if (any_matched) {
            ++report.union_matched;
        } else {
            report.uncovered_records.push_back(matrix.records[r]);
        }
    }
    report.union_caught_rate =
        n_records == 0 ? 0.0 : static_cast<double>(report.union_caught) / n_records;
    report.union_matched_rate =
        n_records == 0 ? 0.0 : static_cast<double>(report.union_matched) / n_records;

    for (std::size_t p = 0; p < n_prompts; ++p) {
        PromptCoverage pc;
        pc.prompt_id = matrix.prompts[p];
        for (std::size_t r = 0; r < n_records; ++r) {
            if (matrix.caught[p][r]) ++pc.caught;
            if (matrix.matched[p][r]) ++pc.matched;
        }
        pc.match_rate_among_caught =
            pc.caught == 0 ? std::numeric_limits<double>::quiet_NaN()
                           : static_cast<double>(pc.matched) / static_cast<double>(pc.caught);
        report.per_prompt.push_back(std::move(pc));
    }

    report.disagreement.assign(n_prompts, std::vector<double>(n_prompts, 0.0));
    for (std::size_t p = 0; p < n_prompts; ++p) {
        for (std::size_t q = p + 1; q < n_prompts; ++q) {
            std::size_t differ = 0;
            for (std::size_t r = 0; r < n_records; ++r) {
                if (matrix.caught[p][r] != matrix.caught[q][r]) ++differ;
            }
            double rate = n_records == 0 ? 0.0 : static_cast<double>(differ) / n_records;
            report.disagreement[p][q] = rate;
            report.disagreement[q][p] = rate;
        }
    }
    return report;
}

nlohmann::json coverage_report_to_json(const CoverageReport& report) {
    nlohmann::json per_prompt = nlohmann::json::array();
    for (const auto& p : report.per_prompt) {
        per_prompt.push_back({{"prompt_id", p.prompt_id},
                              {"caught", p.caught},
                              {"matched", p.matched},
                              {"match_rate_among_caught", p.match_rate_among_caught}});
    }
    nlohmann::json disagreement = nlohmann::json::array();
    for (std::size_t p = 0; p < report.n_prompts; ++p) {
        for (std::size_t q = p + 1; q < report.n_prompts; ++q) {
            disagreement.push_back({{"prompt_a", report.per_prompt[p].prompt_id},
                                    {"prompt_b", report.per_prompt[q].prompt_id},
                                    {"rate", report.disagreement[p][q]}});
        }
    }
    return {
        {"n_prompts", report.n_prompts},
        {"n_records", report.n_records},
        {"union_caught", report.union_caught},
        {"union_matched", report.union_matched},
        {"union_caught_rate", report.union_caught_rate},
        {"union_matched_rate", report.union_matched_rate},
        {"per_prompt", per_prompt},
        {"pairwise_disagreement", disagreement},
        {"uncovered_records", report.uncovered_records},
    };
}

std::string coverage_report_csv(const CoverageReport& report) {
    std::string out = "prompt,caught,matched,match_rate_among_caught\n";
    for (const auto& p : report.per_prompt) {
        out += p.prompt_id;
        out += ',';
        out += std::to_string(p.caught);
        out += ',';
        out += std::to_string(p.matched);
        out += ',';
        if (!std::isnan(p.match_rate_among_caught)) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.10g", p.match_rate_among_caught);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

nlohmann::json annotation_to_json(const ErrorAnnotation& annotation) {
    nlohmann::json created_from = nlohmann::json::array();
    if (annotation.used_reference_solution) created_from.push_back("reference_solution");
    if (annotation.used_rubric) created_from.push_back("rubric");
    return {
        {"record_id", annotation.record_id},
        {"description", annotation.description},
        {"annotator_model", annotation.annotator_model},
        {"created_from", created_from},
    };
}

ErrorAnnotation annotation_from_json(const nlohmann::json& obj) {
    ErrorAnnotation annotation;
    annotation.record_id = obj.at("record_id").get<std::string>();
    annotation.description = obj.at("description").get<std::string>();
    annotation.annotator_model = obj.value("annotator_model", "");
    for (const auto& source : obj.value("created_from", nlohmann::json::array())) {
        if (source == "reference_solution") annotation.used_reference_solution = true;
        if (source == "rubric") annotation.used_rubric = true;
    }
    if (annotation.description.empty()) {
        throw DataError("annotation for record " + annotation.record_id +
                        " has an empty description");
    }
    return annotation;
}

std::vector<ErrorAnnotation> load_annotations(const std::filesystem::path& path) {
    std::vector<ErrorAnnotation> annotations;
    for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& obj) {
        try {
            annotations.push_back(annotation_from_json(obj));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.filename().string() + " line " + std::to_string(line_no) +
                            ": " + e.what());
        }
    });
    return annotations;
}

void save_annotations(const std::filesystem::path& path,
                      const std::vector<ErrorAnnotation>& annotations) {
    std::vector<nlohmann::json> objects;
    objects.reserve(annotations.size());
    for (const auto& annotation : annotations) {
        objects.push_back(annotation_to_json(annotation));
    }
    write_jsonl(path, objects);
}

}  // namespace proofjudge
