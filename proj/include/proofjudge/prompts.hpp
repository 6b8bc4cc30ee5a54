#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proofjudge/dataset.hpp"

namespace proofjudge {

enum class PromptRole { Baseline, ErrorDetection, EnsembleGeneral, EnsembleSpecialist };
enum class HeaderStyle { Bracketed, Caps };

std::string to_string(PromptRole role);
PromptRole prompt_role_from_string(const std::string& s);
std::string to_string(HeaderStyle style);
HeaderStyle header_style_from_string(const std::string& s);

/// A named judging prompt template. The body already contains the boxed
/// verdict instruction; rendering only appends the problem/proof blocks.
struct PromptSpec {
    std::string id;
    std::string title;
    std::string body;
    PromptRole role = PromptRole::Baseline;
    HeaderStyle header_style = HeaderStyle::Bracketed;
    int default_repetitions = 1;
};

/// An immutable, checksum-verified prompt corpus loaded from a bundle
/// directory. `prompts` holds the judging roster in manifest order;
/// `aux_prompts` holds the error-annotation and error-match assets, which
/// are not part of the judging roster.
struct PromptBundle {
    std::string name;
    std::string manifest_version;
    std::vector<PromptSpec> prompts;
    std::vector<PromptSpec> aux_prompts;

    const PromptSpec* find(const std::string& id) const;
    /// Throws ConfigError when `id` is not in the roster.
    const PromptSpec& get(const std::string& id) const;
    /// Looks up an aux asset (annotation/match prompt). Throws ConfigError.
    const PromptSpec& get_aux(const std::string& id) const;
    /// sha256 of every prompt file keyed by id, for run manifests.
    std::vector<std::pair<std::string, std::string>> checksums;
};

/// Loads and verifies a bundle directory (manifest.json + one text file per
/// prompt). A checksum mismatch or any invariant violation is a DataError.
PromptBundle load_bundle(const std::filesystem::path& dir);

/// Roster in manifest order, optionally filtered by role.
std::vector<PromptSpec> list_prompts(const PromptBundle& bundle,
                                     std::optional<PromptRole> role = std::nullopt);

/// Renders (prompt, record) into the judge message: the body followed by
/// two header blocks. Byte layout is normative for caching stability:
///   bracketed:  body + "\n\n[Problem]\n" + problem + "\n\n[Solution]\n" + proof
///   caps:       body + "\n\nPROBLEM\n"  + problem + "\n\nPROOF\n"      + proof
std::string render(const PromptSpec& prompt, const ProofRecord& record);

/// Concatenates prompt bodies into one numbered-section prompt (role
/// baseline, one repetition). All inputs must share a header style.
PromptSpec merge_prompts(std::span<const PromptSpec> prompts, const std::string& new_id);

}  // namespace proofjudge
