#include "proofjudge/dataset.hpp"

#include <algorithm>
#include <iostream>
#include <random>
#include <unordered_set>

#include "proofjudge/errors.hpp"
#include "proofjudge/jsonl.hpp"

namespace proofjudge {

namespace {

const char* kKnownFields[] = {"id",    "dataset", "problem",            "proof",
                              "score", "label",   "reference_solution", "rubric"};

void validate_record(const ProofRecord& r, const std::string& where) {
    if (r.id.empty()) throw DataError(where + ": empty id");
    if (r.problem.empty()) throw DataError(where + ": empty problem (id " + r.id + ")");
    if (r.proof.empty()) throw DataError(where + ": empty proof (id " + r.id + ")");
    if (r.human_score && (*r.human_score < 0 || *r.human_score > 7)) {
        throw DataError(where + ": score " + std::to_string(*r.human_score) +
                        " outside 0..7 (id " + r.id + ")");
    }
    if (!r.human_score && !r.human_label) {
        throw DataError(where + ": record needs a score or a label (id " + r.id + ")");
    }
}

// mt19937_64-backed draw in [0, bound) via rejection sampling. Unlike
// std::uniform_int_distribution, identical output on every platform.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

// Deterministic choice of k indices out of [0, n), returned sorted.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                        std::mt19937_64& rng) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(bounded_draw(rng, n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace

std::string to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::ImoGradingBench: return "imo-gradingbench";
        case DatasetKind::ProofArena: return "proofarena";
        case DatasetKind::ProofBench: return "proofbench";
        case DatasetKind::Custom: return "custom";
    }
    return "custom";
}

DatasetKind dataset_kind_from_string(const std::string& s) {
    if (s == "imo-gradingbench") return DatasetKind::ImoGradingBench;
    if (s == "proofarena") return DatasetKind::ProofArena;
    if (s == "proofbench") return DatasetKind::ProofBench;
    if (s == "custom") return DatasetKind::Custom;
    throw DataError("unknown dataset kind: " + s);
}

ProofRecord record_from_json(const nlohmann::json& obj) {
    ProofRecord r;
    r.id = obj.value("id", "");
    r.dataset = dataset_kind_from_string(obj.value("dataset", "custom"));
    r.problem = obj.value("problem", "");
    r.proof = obj.value("proof", "");
    if (obj.contains("score") && !obj["score"].is_null()) {
        if (!obj["score"].is_number_integer()) {
            throw DataError("score must be an integer (id " + r.id + ")");
        }
        r.human_score = obj["score"].get<int>();
    }
    if (obj.contains("label") && !obj["label"].is_null()) {
        if (!obj["label"].is_boolean()) {
            throw DataError("label must be a boolean (id " + r.id + ")");
        }
        r.human_label = obj["label"].get<bool>();
    }
    if (obj.contains("reference_solution") && !obj["reference_solution"].is_null()) {
        r.reference_solution = obj["reference_solution"].get<std::string>();
    }
    if (obj.contains("rubric") && !obj["rubric"].is_null()) {
        r.rubric = obj["rubric"].get<std::string>();
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(std::begin(kKnownFields), std::end(kKnownFields), it.key()) ==
            std::end(kKnownFields)) {
            r.extra[it.key()] = it.value();
        }
    }
    return r;
}

nlohmann::json record_to_json(const ProofRecord& r) {
    nlohmann::json obj;
    obj["id"] = r.id;
    obj["dataset"] = to_string(r.dataset);
    obj["problem"] = r.problem;
    obj["proof"] = r.proof;
    if (r.human_score) obj["score"] = *r.human_score;
    if (r.human_label) obj["label"] = *r.human_label;
    if (r.reference_solution) obj["reference_solution"] = *r.reference_solution;
    if (r.rubric) obj["rubric"] = *r.rubric;
    for (auto it = r.extra.begin(); it != r.extra.end(); ++it) {
        obj[it.key()] = it.value();
    }
    return obj;
}

std::vector<ProofRecord> load_dataset(const std::filesystem::path& path,
                                      DatasetFormat format) {
    (void)format;  // jsonl is the only format
    std::vector<ProofRecord> records;
    std::unordered_set<std::string> seen_ids;
    for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& obj) {
        std::string where = path.filename().string() + " line " + std::to_string(line_no);
        ProofRecord r;
        try {
            r = record_from_json(obj);
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        validate_record(r, where);
        if (!seen_ids.insert(r.id).second) {
            throw DataError(where + ": duplicate id " + r.id);
        }
        if (r.human_label && r.human_score) {
            std::cerr << "warning: " << where << ": record " << r.id
                      << " has both label and score; label wins\n";
        }
        records.push_back(std::move(r));
    });
    return records;
}

void save_dataset(const std::filesystem::path& path,
                  const std::vector<ProofRecord>& records) {
    std::vector<nlohmann::json> objects;
    objects.reserve(records.size());
    for (const auto& r : records) objects.push_back(record_to_json(r));
    write_jsonl(path, objects);
}

bool derive_label(const ProofRecord& record, const LabelPolicy& policy) {
    if (policy.correct_min_score < 1 || policy.correct_min_score > 7) {
        throw ConfigError("correct_min_score must be in 1..7, got " +
                          std::to_string(policy.correct_min_score));
    }
    if (record.human_label) return *record.human_label;
    if (!record.human_score) {
        throw DataError("record " + record.id + " has neither label nor score");
    }
    return *record.human_score >= policy.correct_min_score;
}

std::vector<ProofRecord> sample_balanced_subset(const std::vector<ProofRecord>& records,
                                                std::size_t n_incorrect,
                                                std::size_t n_correct,
                                                const LabelPolicy& policy,
                                                std::uint64_t seed) {
    std::vector<std::size_t> correct_idx;
    std::vector<std::size_t> incorrect_idx;
    for (std::size_t i = 0; i < records.size(); ++i) {
        (derive_label(records[i], policy) ? correct_idx : incorrect_idx).push_back(i);
    }
    if (incorrect_idx.size() < n_incorrect) {
        throw DataError("need " + std::to_string(n_incorrect) + " incorrect records, have " +
                        std::to_string(incorrect_idx.size()));
    }
    if (correct_idx.size() < n_correct) {
        throw DataError("need " + std::to_string(n_correct) + " correct records, have " +
                        std::to_string(correct_idx.size()));
    }

    std::mt19937_64 rng(seed);
    auto picked_incorrect = sample_indices(incorrect_idx.size(), n_incorrect, rng);
    auto picked_correct = sample_indices(correct_idx.size(), n_correct, rng);

    std::vector<std::size_t> chosen;
    chosen.reserve(n_incorrect + n_correct);
    for (auto i : picked_incorrect) chosen.push_back(incorrect_idx[i]);
    for (auto i : picked_correct) chosen.push_back(correct_idx[i]);
    std::sort(chosen.begin(), chosen.end());

    std::vector<ProofRecord> result;
    result.reserve(chosen.size());
    for (auto i : chosen) result.push_back(records[i]);
    return result;
}

}  // namespace proofjudge
