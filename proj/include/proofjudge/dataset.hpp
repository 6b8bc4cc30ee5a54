#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace proofjudge {

enum class DatasetKind { ImoGradingBench, ProofArena, ProofBench, Custom };

std::string to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(const std::string& s);

/// One problem/proof pair with its human grade. The unit of judgment.
struct ProofRecord {
    std::string id;
    DatasetKind dataset = DatasetKind::Custom;
    std::string problem;
    std::string proof;
    std::optional<int> human_score;   // 0..7
    std::optional<bool> human_label;  // true = proof correct
    std::optional<std::string> reference_solution;
    std::optional<std::string> rubric;
    nlohmann::json extra = nlohmann::json::object();  // unknown fields, kept on round-trip

    bool operator==(const ProofRecord&) const = default;
};

/// Minimum 0-7 human score treated as "correct" when binarizing labels.
struct LabelPolicy {
    int correct_min_score = 7;
};

enum class DatasetFormat { Jsonl };

/// Loads a JSONL dataset, one record object per line, preserving file order.
/// Validates every record invariant; errors name the offending line.
std::vector<ProofRecord> load_dataset(const std::filesystem::path& path,
                                      DatasetFormat format = DatasetFormat::Jsonl);

/// Serializes records back to the JSONL schema. load -> save -> load
/// round-trips to an identical record list.
void save_dataset(const std::filesystem::path& path,
                  const std::vector<ProofRecord>& records);

nlohmann::json record_to_json(const ProofRecord& record);
ProofRecord record_from_json(const nlohmann::json& obj);

/// Binary ground truth under a policy. A direct human label always wins;
/// otherwise correct iff human_score >= policy.correct_min_score.
bool derive_label(const ProofRecord& record, const LabelPolicy& policy);

/// Draws exactly n_incorrect + n_correct records, uniformly without
/// replacement within each derived-label class, preserving dataset order in
/// the result. Deterministic for a fixed (records, seed) on every platform.
std::vector<ProofRecord> sample_balanced_subset(const std::vector<ProofRecord>& records,
                                                std::size_t n_incorrect,
                                                std::size_t n_correct,
                                                const LabelPolicy& policy,
                                                std::uint64_t seed);

}  // namespace proofjudge
