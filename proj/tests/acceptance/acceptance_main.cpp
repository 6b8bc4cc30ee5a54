// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is self-contained and enforces its own runtime
// budget where one applies.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "proofjudge/backends.hpp"
#include "proofjudge/config.hpp"
#include "proofjudge/dataset.hpp"
#include "proofjudge/engine.hpp"
#include "proofjudge/error_lab.hpp"
#include "proofjudge/errors.hpp"
#include "proofjudge/jsonl.hpp"
#include "proofjudge/prompts.hpp"
#include "proofjudge/run_output.hpp"
#include "proofjudge/scoring.hpp"
#include "proofjudge/verdict.hpp"

using namespace proofjudge;

namespace {

struct Failure {
    std::string reason;
};

void require(bool condition, const std::string& reason) {
    if (!condition) throw Failure{reason};
}

void require_close(double actual, double expected, double tolerance,
                   const std::string& what) {
    if (std::isnan(actual) || std::abs(actual - expected) > tolerance) {
        std::ostringstream msg;
        msg << what << ": got " << actual << ", want " << expected << " +/- " << tolerance;
        throw Failure{msg.str()};
    }
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

const PromptBundle& default_bundle() {
    static PromptBundle bundle = load_bundle(TEST_BUNDLE_DIR);
    return bundle;
}

ProofRecord make_record(const std::string& id, int score) {
    ProofRecord r;
    r.id = id;
    r.problem = "problem " + id;
    r.proof = "proof " + id;
    r.human_score = score;
    return r;
}

std::vector<ProofRecord> balanced_records(int n) {
    std::vector<ProofRecord> records;
    for (int i = 0; i < n; ++i) {
        records.push_back(make_record("r" + std::to_string(i), i % 2 == 0 ? 7 : 2));
    }
    return records;
}

class LambdaBackend : public JudgeBackend {
public:
    using Fn = std::function<QueryResult(const CallContext&, const std::string&)>;
    explicit LambdaBackend(Fn fn) : fn_(std::move(fn)) {}
    QueryResult query(const CallContext& ctx, const std::string& message) override {
        return fn_(ctx, message);
    }
    std::string model_id() const override { return "lambda"; }

private:
    Fn fn_;
};

// --- criterion 1 ---------------------------------------------------------

void voting_oracle_equivalence() {
    const AggregationRule paper{AggregationKind::ThresholdVote, 8,
                                UnparseablePolicy::AsIncorrectVote};
    std::vector<Verdict> votes(12);

    // All 2^12 parseable vectors against a brute-force counter.
    for (int code = 0; code < (1 << 12); ++code) {
        int correct = 0;
        for (int i = 0; i < 12; ++i) {
            bool is_correct = (code >> i) & 1;
            votes[i] = is_correct ? Verdict::Correct : Verdict::Incorrect;
            correct += is_correct;
        }
        Verdict expected = correct >= 8 ? Verdict::Correct : Verdict::Incorrect;
        require(aggregate(votes, paper, 12) == expected,
                "parseable vector " + std::to_string(code) + " disagrees with the counter");
    }

    // 1,000 random vectors with unparseables under both policies.
    std::mt19937 rng(271828);
    for (int trial = 0; trial < 1000; ++trial) {
        int correct = 0, parseable = 0;
        for (auto& v : votes) {
            switch (rng() % 3) {
                case 0: v = Verdict::Correct; ++correct; ++parseable; break;
                case 1: v = Verdict::Incorrect; ++parseable; break;
                default: v = Verdict::Unparseable; break;
            }
        }
        // as_incorrect_vote: unparseables are Incorrect votes.
        Verdict expected = correct >= 8 ? Verdict::Correct : Verdict::Incorrect;
        require(aggregate(votes, paper, 12) == expected,
                "as_incorrect_vote disagrees with the policy-aware oracle");

        // drop_call: threshold rescaled as ceil(8 * effective / 12).
        AggregationRule drop{AggregationKind::ThresholdVote, 8, UnparseablePolicy::DropCall};
        if (parseable == 0) {
            try {
                aggregate(votes, drop, 12);
                require(false, "drop_call accepted an all-unparseable vector");
            } catch (const MetricError&) {
            }
        } else {
            int threshold = (8 * parseable + 11) / 12;
            Verdict drop_expected =
                correct >= threshold ? Verdict::Correct : Verdict::Incorrect;
            require(aggregate(votes, drop, 12) == drop_expected,
                    "drop_call disagrees with the policy-aware oracle");
        }
    }
}

// --- criterion 2 ---------------------------------------------------------

void metric_oracle_equivalence() {
    std::mt19937 rng(31415);
    for (int trial = 0; trial < 1000; ++trial) {
        long tp = 1 + rng() % 100, fn = rng() % 100;
        long tn = 1 + rng() % 100, fp = rng() % 100;

        // Recover the counts through the library's tally.
        std::map<std::string, Verdict> verdicts;
        std::map<std::string, bool> labels;
        long serial = 0;
        auto add = [&](bool label, Verdict verdict, long count) {
            for (long i = 0; i < count; ++i) {
                std::string id = "x" + std::to_string(serial++);
                labels[id] = label;
                verdicts[id] = verdict;
            }
        };
        add(false, Verdict::Incorrect, tp);
        add(false, Verdict::Correct, fn);
        add(true, Verdict::Correct, tn);
        add(true, Verdict::Incorrect, fp);

        ConfusionCounts counts = confusion(verdicts, labels);
        require(counts.tp == tp && counts.fn == fn && counts.tn == tn && counts.fp == fp,
                "confusion tally disagrees with construction");

        double tpr = static_cast<double>(tp) / static_cast<double>(tp + fn);
        double fnr = static_cast<double>(fn) / static_cast<double>(tp + fn);
        double tnr = static_cast<double>(tn) / static_cast<double>(tn + fp);
        double fpr = static_cast<double>(fp) / static_cast<double>(tn + fp);
        require(std::abs(balanced_accuracy(counts) - (tpr + tnr) / 2.0) <= 1e-12,
                "balanced_accuracy deviates from (TPR+TNR)/2");
        require(std::abs(tpr + fnr - 1.0) <= 1e-12, "tpr+fnr != 1");
        require(std::abs(tnr + fpr - 1.0) <= 1e-12, "tnr+fpr != 1");
    }

    // The library's own reported rates satisfy the identities as well.
    EnsemblePlan plan{{{"A", 1}}};
    AggregationRule single;
    for (int trial = 0; trial < 50; ++trial) {
        std::map<std::string, bool> labels;
        std::vector<JudgmentRecord> judgments;
        for (int i = 0; i < 40; ++i) {
            JudgmentRecord j;
            j.record_id = "r" + std::to_string(i);
            j.prompt_id = "A";
            j.verdict = rng() % 2 ? Verdict::Correct : Verdict::Incorrect;
            labels[j.record_id] = i % 2 == 0;
            judgments.push_back(j);
        }
        auto report = build_report(judgments, plan, single, labels, 1);
        const auto& m = report.per_replicate[0];
        require(std::abs(m.tpr + m.fnr - 1.0) <= 1e-12, "reported tpr+fnr != 1");
        require(std::abs(m.tnr + m.fpr - 1.0) <= 1e-12, "reported tnr+fpr != 1");
        require(std::abs(m.balanced_accuracy - (m.tpr + m.tnr) / 2.0) <= 1e-12,
                "reported BA deviates from (TPR+TNR)/2");
    }
}

// --- criterion 3 ---------------------------------------------------------

void self_consistency_closed_form() {
    // Every record answers Correct with probability 0.9 (tnr=0.9 on correct
    // proofs, tpr=0.1 on incorrect ones). Expected unanimity at R=3 is
    // 0.9^3 + 0.1^3 = 0.7300.
    auto records = balanced_records(10000);
    PromptBundle bundle;
    PromptSpec p;
    p.id = "probe";
    p.title = "probe";
    p.body = "judge \\boxed{CORRECT} or \\boxed{INCORRECT}";
    bundle.prompts.push_back(p);
    EnsemblePlan plan{{{"probe", 1}}};
    AggregationRule single;
    SimulatorBackend backend({0.1, 0.9, 777});

    RunOptions options;
    options.replicates = 3;
    options.parallelism = 8;
    auto judgments = execute(plan, records, bundle, backend, options);
    auto finals = final_verdicts(judgments, plan, single, 3);
    require_close(self_consistency(finals), 0.7300, 0.02, "self-consistency at R=3");

    options.replicates = 1;
    auto single_run = execute(plan, records, bundle, backend, options);
    auto single_finals = final_verdicts(single_run, plan, single, 1);
    require(self_consistency(single_finals) == 1.0, "R=1 self-consistency must be exactly 1");
}

// --- criterion 4 ---------------------------------------------------------

void monotonic_k_sweep() {
    auto records = balanced_records(2000);
    PromptBundle bundle;
    PromptSpec p;
    p.id = "probe";
    p.title = "probe";
    p.body = "judge \\boxed{CORRECT} or \\boxed{INCORRECT}";
    bundle.prompts.push_back(p);
    EnsemblePlan plan{{{"probe", 1}}};
    AggregationRule single;
    SimulatorBackend backend({0.1, 0.9, 4321});

    RunOptions options;
    options.replicates = 7;
    options.parallelism = 8;
    auto judgments = execute(plan, records, bundle, backend, options);
    std::map<std::string, bool> labels;
    for (const auto& r : records) labels[r.id] = derive_label(r, LabelPolicy{7});
    auto report = build_report(judgments, plan, single, labels, 7);

    require(report.sc_prefix.size() == 7, "expected prefix rates for k=1..7");
    require(report.sc_prefix[0] == 1.0, "k=1 self-consistency must be exactly 1");
    for (std::size_t k = 1; k < 7; ++k) {
        require(report.sc_prefix[k] <= report.sc_prefix[k - 1],
                "self-consistency increased from k=" + std::to_string(k) + " to k=" +
                    std::to_string(k + 1));
    }
}

// --- criterion 5 ---------------------------------------------------------

void simulated_judge_calibration() {
    auto records = balanced_records(10000);
    PromptBundle bundle;
    PromptSpec p;
    p.id = "probe";
    p.title = "probe";
    p.body = "judge \\boxed{CORRECT} or \\boxed{INCORRECT}";
    bundle.prompts.push_back(p);
    EnsemblePlan plan{{{"probe", 1}}};
    AggregationRule single;
    SimulatorBackend backend({0.8, 0.9, 90210});

    RunOptions options;
    options.replicates = 3;
    options.parallelism = 8;
    auto judgments = execute(plan, records, bundle, backend, options);
    std::map<std::string, bool> labels;
    for (const auto& r : records) labels[r.id] = derive_label(r, LabelPolicy{7});
    auto report = build_report(judgments, plan, single, labels, 3);

    for (const auto& m : report.per_replicate) {
        require_close(m.balanced_accuracy, 0.85, 0.02, "per-replicate BA");
        require_close(m.fnr, 0.20, 0.02, "per-replicate FNR (flawed proofs accepted)");
        require_close(m.fpr, 0.10, 0.02, "per-replicate FPR (correct proofs rejected)");
    }
}

// --- criterion 6 ---------------------------------------------------------

void label_policy_table() {
    for (int score = 0; score <= 7; ++score) {
        ProofRecord r = make_record("s", score);
        require(derive_label(r, LabelPolicy{7}) == (score == 7),
                "min=7 must accept only score 7 (score " + std::to_string(score) + ")");
        require(derive_label(r, LabelPolicy{6}) == (score >= 6),
                "min=6 must accept exactly {6,7} (score " + std::to_string(score) + ")");
    }
    for (bool label : {false, true}) {
        ProofRecord r;
        r.id = "arena";
        r.problem = "P";
        r.proof = "S";
        r.human_label = label;
        require(derive_label(r, LabelPolicy{7}) == label, "direct label must pass through");
        r.human_score = 7;  // label still wins when both are present
        require(derive_label(r, LabelPolicy{7}) == label,
                "direct label must win over the score");
    }
}

// --- criterion 7 ---------------------------------------------------------

void paper_ensemble_structure() {
    const auto& bundle = default_bundle();
    require(list_prompts(bundle).size() == 23, "default bundle must list 23 prompts");
    require(list_prompts(bundle, PromptRole::Baseline).size() == 3, "3 baseline prompts");
    require(list_prompts(bundle, PromptRole::ErrorDetection).size() == 12,
            "12 error-detection prompts");

    ExperimentConfig config;
    config.plan_preset = "paper-ensemble";
    auto resolved = resolve_plan(config, bundle);

    require(resolved.plan.total_calls() == 12, "paper ensemble must issue 12 calls");
    std::set<std::string> ids;
    for (const auto& call : resolved.plan.calls) ids.insert(call.prompt_id);
    require(ids.size() == 8, "paper ensemble must span 8 distinct prompts");

    int general_calls = 0;
    for (const auto& call : resolved.plan.calls) {
        const auto& spec = bundle.get(call.prompt_id);
        if (spec.role == PromptRole::EnsembleGeneral) {
            general_calls += call.num_calls;
        } else {
            require(spec.role == PromptRole::EnsembleSpecialist,
                    "ensemble call uses a non-ensemble prompt");
            require(call.num_calls == 1, "specialists contribute one call each");
        }
    }
    require(general_calls == 5, "the general grading prompt must contribute 5 calls");
    require(resolved.rule.kind == AggregationKind::ThresholdVote &&
                resolved.rule.accept_threshold == 8,
            "acceptance threshold must be 8");
}

// --- criterion 8 ---------------------------------------------------------

void parser_corpus() {
    const std::vector<std::pair<std::string, Verdict>> corpus = {
        // clean verdicts
        {"The argument is sound. \\boxed{CORRECT}", Verdict::Correct},
        {"Step 3 fails. \\boxed{INCORRECT}", Verdict::Incorrect},
        {"\\boxed{CORRECT}", Verdict::Correct},
        {"\\boxed{INCORRECT}", Verdict::Incorrect},
        // lowercase / mixed case
        {"verdict: \\boxed{correct}", Verdict::Correct},
        {"verdict: \\boxed{incorrect}", Verdict::Incorrect},
        {"\\boxed{Correct}", Verdict::Correct},
        {"\\boxed{inCORRECT}", Verdict::Incorrect},
        // \lboxed spelling
        {"final: \\lboxed{CORRECT}", Verdict::Correct},
        {"final: \\lboxed{INCORRECT}", Verdict::Incorrect},
        {"\\lboxed{ incorrect }", Verdict::Incorrect},
        {"\\lboxed{correct}", Verdict::Correct},
        // internal whitespace
        {"\\boxed{ CORRECT }", Verdict::Correct},
        {"\\boxed{\tINCORRECT\t}", Verdict::Incorrect},
        {"\\boxed {CORRECT}", Verdict::Correct},
        // double verdicts: last occurrence dominates
        {"\\boxed{INCORRECT} wait, no: \\boxed{CORRECT}", Verdict::Correct},
        {"\\boxed{CORRECT} hmm, actually \\boxed{INCORRECT}", Verdict::Incorrect},
        {"\\boxed{CORRECT} \\boxed{CORRECT} \\boxed{INCORRECT}", Verdict::Incorrect},
        {"\\lboxed{incorrect} then \\boxed{CORRECT}", Verdict::Correct},
        // verdict-free prose
        {"I see no verdict here.", Verdict::Unparseable},
        {"", Verdict::Unparseable},
        {"The proof is correct in my opinion.", Verdict::Unparseable},
        {"CORRECT (but not boxed)", Verdict::Unparseable},
        // boxed non-verdicts are ignored
        {"the answer is \\boxed{42}", Verdict::Unparseable},
        {"\\boxed{x+1} so \\boxed{CORRECT}", Verdict::Correct},
        {"\\boxed{CORRECTNESS}", Verdict::Unparseable},
        {"boxed{CORRECT}", Verdict::Unparseable},
        // unclosed brace
        {"\\boxed{CORRECT", Verdict::Unparseable},
    };
    require(corpus.size() >= 25, "corpus must have at least 25 responses");
    for (const auto& [text, expected] : corpus) {
        require(parse_verdict(text) == expected, "parse mismatch on: " + text);
    }
}

// --- criterion 9 ---------------------------------------------------------

void end_to_end_determinism() {
    TempDir work("pj_accept_determinism");

    auto dataset_path = work.path / "data.jsonl";
    std::vector<ProofRecord> records;
    for (int i = 0; i < 10; ++i) {
        records.push_back(make_record("p" + std::to_string(i), i % 2 == 0 ? 7 : 3));
    }
    save_dataset(dataset_path, records);

    // Scripted fixtures over two baseline prompts, R=2: half the records
    // judged correct, a couple with disagreements and one lboxed spelling.
    FixtureMap fixtures;
    for (int i = 0; i < 10; ++i) {
        std::string id = "p" + std::to_string(i);
        for (const std::string& prompt : {"imobench", "gimo"}) {
            for (int rep = 0; rep < 2; ++rep) {
                std::string verdict = (i % 2 == 0) == (prompt == "imobench" || i % 3 != 0)
                                          ? "\\boxed{CORRECT}"
                                          : "\\lboxed{incorrect}";
                fixtures[{id, prompt, rep, 0}] =
                    "Analysis of " + id + " by " + prompt + ". " + verdict;
            }
        }
    }
    ScriptedBackend inner(fixtures);

    const auto& bundle = default_bundle();
    EnsemblePlan plan{{{"imobench", 1}, {"gimo", 1}}};
    AggregationRule rule{AggregationKind::ThresholdVote, 2, UnparseablePolicy::AsIncorrectVote};
    std::map<std::string, bool> labels;
    for (const auto& r : records) labels[r.id] = derive_label(r, LabelPolicy{7});

    RunOptions options;
    options.replicates = 2;
    options.parallelism = 4;
    options.cache_dir = work.path / "cache";

    auto run_once = [&](JudgeBackend& backend) {
        auto judgments = execute(plan, records, bundle, backend, options);
        auto report = build_report(judgments, plan, rule, labels, 2);
        write_run_outputs(work.path / "run", nlohmann::json{{"note", "determinism"}}, plan,
                          rule, bundle, "scripted", "custom", 0, judgments, report);
        std::map<std::string, std::string> bytes;
        for (const auto& name : {"judgments.jsonl", "report.json", "report.csv",
                                 "per_prompt.csv", "plot_data.csv"}) {
            bytes[name] = read_file(work.path / "run" / name);
        }
        return bytes;
    };

    CountingBackend cold(inner);
    auto first = run_once(cold);
    require(cold.calls() == 40, "cold run must issue 10*2*2 backend calls");

    CountingBackend warm(inner);
    auto second = run_once(warm);
    require(warm.calls() == 0, "warm run must issue zero backend calls");
    for (const auto& [name, content] : first) {
        require(second.at(name) == content,
                std::string(name) + " differs between cold and warm runs");
    }
}

// --- criterion 10 --------------------------------------------------------

void coverage_accounting() {
    TempDir work("pj_accept_coverage");

    // 3 prompts x 5 records, hand-specified catches:
    //   P1 catches {r1, r2}, P2 catches {r2, r3, r4}, P3 catches nothing.
    // Matches: P1-r1 yes, P1-r2 no, P2-r2 yes, P2-r3 yes, P2-r4 no.
    const std::vector<std::string> prompt_ids = {"P1", "P2", "P3"};
    const std::map<std::pair<std::string, std::string>, bool> catches = {
        {{"P1", "r1"}, true},  {{"P1", "r2"}, true},  {{"P1", "r3"}, false},
        {{"P1", "r4"}, false}, {{"P1", "r5"}, false}, {{"P2", "r1"}, false},
        {{"P2", "r2"}, true},  {{"P2", "r3"}, true},  {{"P2", "r4"}, true},
        {{"P2", "r5"}, false}, {{"P3", "r1"}, false}, {{"P3", "r2"}, false},
        {{"P3", "r3"}, false}, {{"P3", "r4"}, false}, {{"P3", "r5"}, false},
    };
    const std::map<std::pair<std::string, std::string>, bool> match_fixtures = {
        {{"P1", "r1"}, true}, {{"P1", "r2"}, false}, {{"P2", "r2"}, true},
        {{"P2", "r3"}, true}, {{"P2", "r4"}, false},
    };

    PromptBundle bundle;
    for (const auto& id : prompt_ids) {
        PromptSpec p;
        p.id = id;
        p.title = id;
        p.body = "detect errors (" + id + ")";
        p.role = PromptRole::ErrorDetection;
        bundle.prompts.push_back(p);
    }
    PromptSpec match_prompt;
    match_prompt.id = "match";
    match_prompt.title = "match";
    match_prompt.body = "compare";
    match_prompt.header_style = HeaderStyle::Caps;

    std::vector<ProofRecord> records;
    std::vector<ErrorAnnotation> annotations;
    for (int i = 1; i <= 5; ++i) {
        std::string id = "r" + std::to_string(i);
        records.push_back(make_record(id, 1));
        ErrorAnnotation a;
        a.record_id = id;
        a.description = "annotated error of " + id;
        a.annotator_model = "scripted";
        annotations.push_back(a);
    }

    // Detection sweep through the engine; responses embed (prompt, record)
    // so the match backend can look up its hand-specified answer.
    FixtureMap detection_fixtures;
    for (const auto& [key, caught] : catches) {
        detection_fixtures[{key.second, key.first, 0, 0}] =
            "sweep " + key.first + " " + key.second + " " +
            (caught ? "\\boxed{INCORRECT}" : "\\boxed{CORRECT}");
    }
    ScriptedBackend sweep_backend(detection_fixtures);
    EnsemblePlan sweep{{{"P1", 1}, {"P2", 1}, {"P3", 1}}};
    RunOptions options;
    options.cache_dir = work.path / "cache";
    auto judgments = execute(sweep, records, bundle, sweep_backend, options);

    LambdaBackend match_backend([&](const CallContext&, const std::string& message) {
        QueryResult r;
        for (const auto& [key, matched] : match_fixtures) {
            if (message.find("sweep " + key.first + " " + key.second) != std::string::npos) {
                r.text = matched ? "\\boxed{MATCH}" : "\\boxed{NO_MATCH}";
                return r;
            }
        }
        throw BackendError("no match fixture for message");
    });

    std::map<std::pair<std::string, std::string>, bool> match_results;
    for (const auto& j : judgments) {
        if (j.verdict != Verdict::Incorrect) continue;
        std::string key = cache_key("scripted", j.prompt_id, j.record_id, 0, 0, 0.0,
                                    ReasoningEffort::None);
        auto text = cached_response_text(options.cache_dir, "scripted", key);
        require(text.has_value(), "cached verifier response missing");
        const ErrorAnnotation* annotation = nullptr;
        for (const auto& a : annotations) {
            if (a.record_id == j.record_id) annotation = &a;
        }
        match_results[{j.prompt_id, j.record_id}] =
            match_error(*text, *annotation, match_backend, match_prompt);
    }

    auto matrix = build_coverage(judgments, prompt_ids, annotations, match_results);
    auto report = coverage_report(matrix);

    // Hand-computed expectations.
    require(report.n_records == 5 && report.n_prompts == 3, "matrix dimensions");
    require(report.union_caught == 4, "union caught must be 4 (r1..r4)");
    require(report.union_matched == 3, "union matched must be 3 (r1, r2, r3)");
    require_close(report.union_matched_rate, 0.6, 1e-12, "union matched rate");
    require(report.per_prompt[0].caught == 2 && report.per_prompt[0].matched == 1,
            "P1 counts");
    require(report.per_prompt[1].caught == 3 && report.per_prompt[1].matched == 2,
            "P2 counts");
    require(report.per_prompt[2].caught == 0 && report.per_prompt[2].matched == 0,
            "P3 counts");
    require_close(report.per_prompt[0].match_rate_among_caught, 0.5, 1e-12, "P1 match rate");
    require_close(report.per_prompt[1].match_rate_among_caught, 2.0 / 3.0, 1e-12,
                  "P2 match rate");
    require(std::isnan(report.per_prompt[2].match_rate_among_caught),
            "P3 match rate is undefined");
    require_close(report.disagreement[0][1], 0.6, 1e-12, "disagreement(P1,P2)");
    require_close(report.disagreement[0][2], 0.4, 1e-12, "disagreement(P1,P3)");
    require_close(report.disagreement[1][2], 0.6, 1e-12, "disagreement(P2,P3)");
    require(report.disagreement[1][0] == report.disagreement[0][1], "symmetry");
    require(report.uncovered_records == std::vector<std::string>{"r4", "r5"},
            "uncovered records must be {r4, r5}");

    // Union matched coverage is monotone as prompts are added.
    long previous = -1;
    for (std::size_t k = 1; k <= prompt_ids.size(); ++k) {
        std::vector<std::string> prefix(prompt_ids.begin(), prompt_ids.begin() + k);
        std::vector<JudgmentRecord> subset;
        for (const auto& j : judgments) {
            if (std::find(prefix.begin(), prefix.end(), j.prompt_id) != prefix.end()) {
                subset.push_back(j);
            }
        }
        std::map<std::pair<std::string, std::string>, bool> match_subset;
        for (const auto& [key, value] : match_results) {
            if (std::find(prefix.begin(), prefix.end(), key.first) != prefix.end()) {
                match_subset[key] = value;
            }
        }
        auto prefix_report =
            coverage_report(build_coverage(subset, prefix, annotations, match_subset));
        require(prefix_report.union_matched >= previous,
                "union matched coverage decreased when adding a prompt");
        previous = prefix_report.union_matched;
    }
}

// --- criterion 11 --------------------------------------------------------

void trainproofs_shape_subsetting() {
    std::vector<ProofRecord> pool;
    std::mt19937 rng(5);
    for (int i = 0; i < 1000; ++i) {
        pool.push_back(make_record("r" + std::to_string(i), i % 4 == 0 ? 7 : rng() % 7));
    }
    LabelPolicy policy{7};

    auto subset = sample_balanced_subset(pool, 140, 60, policy, 2026);
    require(subset.size() == 200, "subset must have exactly 200 records");
    int correct = 0;
    std::set<std::string> ids;
    for (const auto& r : subset) {
        correct += derive_label(r, policy) ? 1 : 0;
        ids.insert(r.id);
    }
    require(correct == 60, "subset must contain exactly 60 correct proofs");
    require(static_cast<int>(subset.size()) - correct == 140,
            "subset must contain exactly 140 incorrect proofs");
    require(ids.size() == 200, "subset must sample without replacement");

    auto again = sample_balanced_subset(pool, 140, 60, policy, 2026);
    require(subset == again, "same seed must reproduce the identical subset");
    auto other = sample_balanced_subset(pool, 140, 60, policy, 2027);
    require(!(subset == other), "a different seed should select a different subset");
}

// --- harness --------------------------------------------------------------

struct Criterion {
    int id;
    std::string name;
    std::function<void()> body;
    double budget_seconds;  // 0 = no runtime requirement
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "voting-oracle equivalence (2^12 + randomized policies)",
         voting_oracle_equivalence, 5.0},
        {2, "metric-oracle equivalence (1000 random confusion matrices)",
         metric_oracle_equivalence, 0.0},
        {3, "self-consistency closed form (0.9^3 + 0.1^3 = 0.7300)",
         self_consistency_closed_form, 10.0},
        {4, "monotonic k-sweep over replicate prefixes", monotonic_k_sweep, 0.0},
        {5, "simulated-judge calibration (BA 0.85, FNR 0.20, FPR 0.10)",
         simulated_judge_calibration, 0.0},
        {6, "label-policy table (min=7 vs min=6, direct labels)", label_policy_table, 0.0},
        {7, "paper-ensemble structure (12 calls, 8 prompts, tau=8)",
         paper_ensemble_structure, 0.0},
        {8, "parser corpus (>=25 responses, last occurrence wins)", parser_corpus, 0.0},
        {9, "end-to-end determinism (cold vs warm cache, zero calls)",
         end_to_end_determinism, 5.0},
        {10, "coverage accounting (3 prompts x 5 records, hand-computed)",
         coverage_accounting, 0.0},
        {11, "TrainProofs-shape subsetting (140/60 of 1000, seeded)",
         trainproofs_shape_subsetting, 0.0},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string failure;
        try {
            criterion.body();
        } catch (const Failure& f) {
            failure = f.reason;
        } catch (const std::exception& e) {
            failure = std::string("exception: ") + e.what();
        }
        double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (failure.empty() && criterion.budget_seconds > 0 &&
            seconds > criterion.budget_seconds) {
            std::ostringstream msg;
            msg << "runtime " << seconds << "s exceeds " << criterion.budget_seconds << "s";
            failure = msg.str();
        }
        if (failure.empty()) {
            std::printf("PASS  criterion %2d: %s (%.2fs)\n", criterion.id,
                        criterion.name.c_str(), seconds);
        } else {
            std::printf("FAIL  criterion %2d: %s -- %s\n", criterion.id,
                        criterion.name.c_str(), failure.c_str());
            ++failures;
        }
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
