#include "proofjudge/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "proofjudge/engine.hpp"
#include "proofjudge/errors.hpp"

namespace proofjudge {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double rate(long num, long den) {
    return den == 0 ? kNaN : static_cast<double>(num) / static_cast<double>(den);
}

ReplicateMetrics metrics_from_counts(const ConfusionCounts& c) {
    ReplicateMetrics m;
    m.counts = c;
    m.tpr = rate(c.tp, c.tp + c.fn);
    m.fnr = rate(c.fn, c.tp + c.fn);
    m.tnr = rate(c.tn, c.tn + c.fp);
    m.fpr = rate(c.fp, c.tn + c.fp);
    m.balanced_accuracy = (m.tpr + m.tnr) / 2.0;
    return m;
}

bool all_same(std::span<const Verdict> verdicts) {
    return std::all_of(verdicts.begin(), verdicts.end(),
                       [&](Verdict v) { return v == verdicts.front(); });
}

}  // namespace

std::string to_string(AggregationKind kind) {
    return kind == AggregationKind::Single ? "single" : "threshold_vote";
}

AggregationKind aggregation_kind_from_string(const std::string& s) {
    if (s == "single") return AggregationKind::Single;
    if (s == "threshold_vote") return AggregationKind::ThresholdVote;
    throw ConfigError("unknown aggregation kind: " + s);
}

std::string to_string(UnparseablePolicy policy) {
    return policy == UnparseablePolicy::AsIncorrectVote ? "as_incorrect_vote" : "drop_call";
}

UnparseablePolicy unparseable_policy_from_string(const std::string& s) {
    if (s == "as_incorrect_vote") return UnparseablePolicy::AsIncorrectVote;
    if (s == "drop_call") return UnparseablePolicy::DropCall;
    throw ConfigError("unknown unparseable policy: " + s);
}

std::string to_string(UnparseableFinalPolicy policy) {
    return policy == UnparseableFinalPolicy::AsIncorrectPrediction ? "as_incorrect_prediction"
                                                                   : "exclude";
}

UnparseableFinalPolicy unparseable_final_policy_from_string(const std::string& s) {
    if (s == "as_incorrect_prediction") return UnparseableFinalPolicy::AsIncorrectPrediction;
    if (s == "exclude") return UnparseableFinalPolicy::Exclude;
    throw ConfigError("unknown unparseable final policy: " + s);
}

Verdict aggregate(std::span<const Verdict> verdicts, const AggregationRule& rule,
                  int plan_total_calls) {
    if (static_cast<int>(verdicts.size()) != plan_total_calls) {
        throw MetricError("vote count " + std::to_string(verdicts.size()) +
                          " does not match the plan's " + std::to_string(plan_total_calls));
    }
    if (rule.kind == AggregationKind::Single) {
        if (plan_total_calls != 1) {
            throw MetricError("single aggregation requires a one-call plan");
        }
        return verdicts.front();
    }

    int total = plan_total_calls;
    if (rule.accept_threshold < 1 || rule.accept_threshold > total) {
        throw MetricError("accept_threshold " + std::to_string(rule.accept_threshold) +
                          " outside 1.." + std::to_string(total));
    }
    int correct = 0;
    int unparseable = 0;
    for (Verdict v : verdicts) {
        if (v == Verdict::Correct) ++correct;
        if (v == Verdict::Unparseable) ++unparseable;
    }

    int threshold = rule.accept_threshold;
    if (rule.unparseable_policy == UnparseablePolicy::DropCall) {
        int effective = total - unparseable;
        if (effective == 0) {
            throw MetricError("all calls dropped: every vote was unparseable");
        }
        // Never accept with proportionally fewer Correct votes than tau/total.
        threshold = (rule.accept_threshold * effective + total - 1) / total;
    }
    return correct >= threshold ? Verdict::Correct : Verdict::Incorrect;
}

ConfusionCounts confusion(const std::map<std::string, Verdict>& final_verdicts,
                          const std::map<std::string, bool>& labels,
                          UnparseableFinalPolicy policy) {
    ConfusionCounts c;
    for (const auto& [record_id, verdict] : final_verdicts) {
        auto it = labels.find(record_id);
        if (it == labels.end()) {
            throw DataError("record " + record_id + " has no ground-truth label");
        }
        Verdict v = verdict;
        if (v == Verdict::Unparseable) {
            if (policy == UnparseableFinalPolicy::Exclude) continue;
            v = Verdict::Incorrect;
        }
        bool proof_correct = it->second;
        bool judged_correct = v == Verdict::Correct;
        if (proof_correct) {
            judged_correct ? ++c.tn : ++c.fp;
        } else {
            judged_correct ? ++c.fn : ++c.tp;
        }
    }
    return c;
}

double balanced_accuracy(const ConfusionCounts& c) {
    if (c.tp + c.fn == 0) {
        throw MetricError("balanced accuracy undefined: no incorrect-labeled records");
    }
    if (c.tn + c.fp == 0) {
        throw MetricError("balanced accuracy undefined: no correct-labeled records");
    }
    double tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    double tnr = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    return (tpr + tnr) / 2.0;
}

double self_consistency(const std::map<std::string, std::vector<Verdict>>& per_record) {
    if (per_record.empty()) {
        throw MetricError("self-consistency undefined on an empty record set");
    }
    std::size_t expected = per_record.begin()->second.size();
    if (expected == 0) {
        throw MetricError("self-consistency needs at least one replicate");
    }
    std::size_t unanimous = 0;
    for (const auto& [record_id, verdicts] : per_record) {
        if (verdicts.size() != expected) {
            throw DataError("ragged replicate list for record " + record_id + ": " +
                            std::to_string(verdicts.size()) + " vs " +
                            std::to_string(expected));
        }
        if (all_same(verdicts)) ++unanimous;
    }
    return static_cast<double>(unanimous) / static_cast<double>(per_record.size());
}

std::map<std::string, std::vector<Verdict>> final_verdicts(
    const std::vector<JudgmentRecord>& judgments, const EnsemblePlan& plan,
    const AggregationRule& rule, int replicates) {
    plan.validate();
    if (replicates < 1) throw ConfigError("replicates must be >= 1");

    // (record, replicate) -> votes, in plan order.
    std::map<std::pair<std::string, int>, std::vector<Verdict>> votes;
    std::set<std::string> record_ids;
    std::set<std::tuple<std::string, std::string, int, int>> seen;
    for (const auto& j : judgments) {
        if (!seen.emplace(j.record_id, j.prompt_id, j.replicate, j.call_index).second) {
            throw DataError("duplicate judgment tuple for record " + j.record_id);
        }
        record_ids.insert(j.record_id);
    }

    // Completeness check, then gather in deterministic plan order.
    std::map<std::tuple<std::string, std::string, int, int>, Verdict> by_key;
    for (const auto& j : judgments) {
        by_key[{j.record_id, j.prompt_id, j.replicate, j.call_index}] = j.verdict;
    }
    std::vector<std::string> missing;
    for (const auto& record_id : record_ids) {
        for (int rep = 0; rep < replicates; ++rep) {
            auto& vec = votes[{record_id, rep}];
            for (const auto& call : plan.calls) {
                for (int k = 0; k < call.num_calls; ++k) {
                    auto it = by_key.find({record_id, call.prompt_id, rep, k});
                    if (it == by_key.end()) {
                        missing.push_back("(" + record_id + ", " + call.prompt_id + ", " +
                                          std::to_string(rep) + ", " + std::to_string(k) +
                                          ")");
                    } else {
                        vec.push_back(it->second);
                    }
                }
            }
        }
    }
    if (!missing.empty()) {
        std::string msg = "incomplete judgment set, missing " +
                          std::to_string(missing.size()) + " tuple(s):";
        for (std::size_t i = 0; i < missing.size() && i < 5; ++i) msg += " " + missing[i];
        throw DataError(msg);
    }
    std::size_t expected =
        record_ids.size() * static_cast<std::size_t>(plan.total_calls()) * replicates;
    if (judgments.size() != expected) {
        throw DataError("judgment set has " + std::to_string(judgments.size()) +
                        " tuples, expected " + std::to_string(expected));
    }

    std::map<std::string, std::vector<Verdict>> result;
    for (const auto& record_id : record_ids) {
        auto& finals = result[record_id];
        finals.reserve(replicates);
        for (int rep = 0; rep < replicates; ++rep) {
            finals.push_back(aggregate(votes[{record_id, rep}], rule, plan.total_calls()));
        }
    }
    return result;
}

MetricsReport build_report(const std::vector<JudgmentRecord>& judgments,
                           const EnsemblePlan& plan, const AggregationRule& rule,
                           const std::map<std::string, bool>& labels, int replicates,
                           UnparseableFinalPolicy final_policy) {
    auto finals = final_verdicts(judgments, plan, rule, replicates);

    MetricsReport report;
    report.n_records = finals.size();
    report.n_replicates = replicates;

    for (int rep = 0; rep < replicates; ++rep) {
        std::map<std::string, Verdict> rep_verdicts;
        for (const auto& [record_id, verdicts] : finals) {
            rep_verdicts[record_id] = verdicts[static_cast<std::size_t>(rep)];
        }
        report.per_replicate.push_back(
            metrics_from_counts(confusion(rep_verdicts, labels, final_policy)));
    }

    double sum = 0, mn = kNaN, mx = kNaN;
    for (const auto& m : report.per_replicate) {
        sum += m.balanced_accuracy;
        if (std::isnan(mn) || m.balanced_accuracy < mn) mn = m.balanced_accuracy;
        if (std::isnan(mx) || m.balanced_accuracy > mx) mx = m.balanced_accuracy;
    }
    report.ba_mean = sum / replicates;
    report.ba_min = mn;
    report.ba_max = mx;

    report.self_consistency_rate = self_consistency(finals);
    for (int k = 1; k <= replicates; ++k) {
        std::size_t unanimous = 0;
        for (const auto& [record_id, verdicts] : finals) {
            if (all_same(std::span(verdicts).first(static_cast<std::size_t>(k)))) {
                ++unanimous;
            }
        }
        report.sc_prefix.push_back(static_cast<double>(unanimous) /
                                   static_cast<double>(finals.empty() ? 1 : finals.size()));
    }

    // Per-prompt standalone breakdown: every (replicate, call) sample of a
    // prompt is treated as one single-rule run.
    std::map<std::tuple<std::string, std::string, int, int>, const JudgmentRecord*> by_key;
    for (const auto& j : judgments) {
        by_key[{j.record_id, j.prompt_id, j.replicate, j.call_index}] = &j;
    }
    for (const auto& call : plan.calls) {
        PromptBreakdown breakdown;
        breakdown.prompt_id = call.prompt_id;
        breakdown.n_samples = replicates * call.num_calls;

        double ba_sum = 0, fpr_sum = 0, fnr_sum = 0;
        double ba_min = kNaN, ba_max = kNaN;
        for (int rep = 0; rep < replicates; ++rep) {
            for (int k = 0; k < call.num_calls; ++k) {
                std::map<std::string, Verdict> sample;
                for (const auto& [record_id, unused] : finals) {
                    sample[record_id] =
                        by_key.at({record_id, call.prompt_id, rep, k})->verdict;
                }
                auto m = metrics_from_counts(confusion(sample, labels, final_policy));
                ba_sum += m.balanced_accuracy;
                fpr_sum += m.fpr;
                fnr_sum += m.fnr;
                if (std::isnan(ba_min) || m.balanced_accuracy < ba_min)
                    ba_min = m.balanced_accuracy;
                if (std::isnan(ba_max) || m.balanced_accuracy > ba_max)
                    ba_max = m.balanced_accuracy;
            }
        }
        breakdown.ba_mean = ba_sum / breakdown.n_samples;
        breakdown.ba_min = ba_min;
        breakdown.ba_max = ba_max;
        breakdown.fpr_mean = fpr_sum / breakdown.n_samples;
        breakdown.fnr_mean = fnr_sum / breakdown.n_samples;

        std::size_t unanimous = 0;
        for (const auto& [record_id, unused] : finals) {
            std::vector<Verdict> samples;
            for (int rep = 0; rep < replicates; ++rep) {
                for (int k = 0; k < call.num_calls; ++k) {
                    samples.push_back(by_key.at({record_id, call.prompt_id, rep, k})->verdict);
                }
            }
            if (all_same(samples)) ++unanimous;
        }
        breakdown.self_consistency =
            finals.empty() ? 1.0
                           : static_cast<double>(unanimous) / static_cast<double>(finals.size());
        report.per_prompt.push_back(std::move(breakdown));
    }

    return report;
}

}  // namespace proofjudge
