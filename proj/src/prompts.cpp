#include "proofjudge/prompts.hpp"

#include <unordered_set>

#include <json.hpp>

#include "proofjudge/errors.hpp"
#include "proofjudge/jsonl.hpp"
#include "proofjudge/sha256.hpp"

namespace proofjudge {

namespace {

PromptSpec parse_manifest_entry(const nlohmann::json& entry,
                                const std::filesystem::path& dir,
                                bool aux) {
    PromptSpec spec;
    spec.id = entry.at("id").get<std::string>();
    spec.title = entry.at("title").get<std::string>();
    spec.header_style = header_style_from_string(entry.at("header_style").get<std::string>());
    if (!aux) {
        spec.role = prompt_role_from_string(entry.at("role").get<std::string>());
        spec.default_repetitions = entry.value("default_repetitions", 1);
    }

    std::string file = entry.at("file").get<std::string>();
    std::string raw = read_file(dir / file);
    std::string expected = entry.at("sha256").get<std::string>();
    if (sha256_hex(raw) != expected) {
        throw DataError("checksum mismatch for prompt file " + file +
                        " (bundle tampered or corrupted)");
    }
    while (!raw.empty() && raw.back() == '\n') raw.pop_back();
    spec.body = std::move(raw);
    if (spec.body.empty()) {
        throw DataError("prompt " + spec.id + " has an empty body");
    }
    if (spec.default_repetitions < 1) {
        throw DataError("prompt " + spec.id + " has default_repetitions < 1");
    }
    return spec;
}

void check_roster_invariants(const std::vector<PromptSpec>& prompts) {
    std::unordered_set<std::string> ids;
    int generals = 0;
    bool any_ensemble = false;
    for (const auto& p : prompts) {
        if (!ids.insert(p.id).second) {
            throw DataError("duplicate prompt id in bundle: " + p.id);
        }
        if (p.role == PromptRole::ErrorDetection && p.header_style != HeaderStyle::Bracketed) {
            throw DataError("error-detection prompt " + p.id + " must use bracketed headers");
        }
        if ((p.role == PromptRole::EnsembleGeneral || p.role == PromptRole::EnsembleSpecialist) &&
            p.header_style != HeaderStyle::Caps) {
            throw DataError("ensemble prompt " + p.id + " must use caps headers");
        }
        if (p.role == PromptRole::EnsembleGeneral) {
            ++generals;
            any_ensemble = true;
            if (p.default_repetitions != 5) {
                throw DataError("ensemble-general prompt " + p.id +
                                " must have default_repetitions=5");
            }
        }
        if (p.role == PromptRole::EnsembleSpecialist) {
            any_ensemble = true;
            if (p.default_repetitions != 1) {
                throw DataError("ensemble-specialist prompt " + p.id +
                                " must have default_repetitions=1");
            }
        }
    }
    if (any_ensemble && generals != 1) {
        throw DataError("bundle with ensemble prompts must have exactly one "
                        "ensemble-general prompt, found " + std::to_string(generals));
    }
}

}  // namespace

std::string to_string(PromptRole role) {
    switch (role) {
        case PromptRole::Baseline: return "baseline";
        case PromptRole::ErrorDetection: return "error-detection";
        case PromptRole::EnsembleGeneral: return "ensemble-general";
        case PromptRole::EnsembleSpecialist: return "ensemble-specialist";
    }
    return "baseline";
}

PromptRole prompt_role_from_string(const std::string& s) {
    if (s == "baseline") return PromptRole::Baseline;
    if (s == "error-detection") return PromptRole::ErrorDetection;
    if (s == "ensemble-general") return PromptRole::EnsembleGeneral;
    if (s == "ensemble-specialist") return PromptRole::EnsembleSpecialist;
    throw ConfigError("unknown prompt role: " + s);
}

std::string to_string(HeaderStyle style) {
    return style == HeaderStyle::Bracketed ? "bracketed" : "caps";
}

HeaderStyle header_style_from_string(const std::string& s) {
    if (s == "bracketed") return HeaderStyle::Bracketed;
    if (s == "caps") return HeaderStyle::Caps;
    throw ConfigError("unknown header style: " + s);
}

const PromptSpec* PromptBundle::find(const std::string& id) const {
    for (const auto& p : prompts) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

const PromptSpec& PromptBundle::get(const std::string& id) const {
    const PromptSpec* p = find(id);
    if (!p) throw ConfigError("unknown prompt id: " + id);
    return *p;
}

const PromptSpec& PromptBundle::get_aux(const std::string& id) const {
    for (const auto& p : aux_prompts) {
        if (p.id == id) return p;
    }
    throw ConfigError("unknown aux prompt id: " + id);
}

PromptBundle load_bundle(const std::filesystem::path& dir) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("invalid bundle manifest in " + dir.string() + ": " + e.what());
    }

    PromptBundle bundle;
    bundle.name = manifest.value("name", dir.filename().string());
    bundle.manifest_version = manifest.value("manifest_version", "1");
    for (const auto& entry : manifest.at("prompts")) {
        bundle.prompts.push_back(parse_manifest_entry(entry, dir, /*aux=*/false));
        bundle.checksums.emplace_back(entry.at("id").get<std::string>(),
                                      entry.at("sha256").get<std::string>());
    }
    for (const auto& entry : manifest.value("aux_prompts", nlohmann::json::array())) {
        bundle.aux_prompts.push_back(parse_manifest_entry(entry, dir, /*aux=*/true));
        bundle.checksums.emplace_back(entry.at("id").get<std::string>(),
                                      entry.at("sha256").get<std::string>());
    }
    check_roster_invariants(bundle.prompts);
    return bundle;
}

std::vector<PromptSpec> list_prompts(const PromptBundle& bundle,
                                     std::optional<PromptRole> role) {
    std::vector<PromptSpec> out;
    for (const auto& p : bundle.prompts) {
        if (!role || p.role == *role) out.push_back(p);
    }
    return out;
}

std::string render(const PromptSpec& prompt, const ProofRecord& record) {
    if (record.problem.empty()) {
        throw DataError("record " + record.id + " has an empty problem");
    }
    if (record.proof.empty()) {
        throw DataError("record " + record.id + " has an empty proof");
    }
    std::string out = prompt.body;
    if (prompt.header_style == HeaderStyle::Bracketed) {
        out += "\n\n[Problem]\n";
        out += record.problem;
        out += "\n\n[Solution]\n";
        out += record.proof;
    } else {
        out += "\n\nPROBLEM\n";
        out += record.problem;
        out += "\n\nPROOF\n";
        out += record.proof;
    }
    return out;
}

PromptSpec merge_prompts(std::span<const PromptSpec> prompts, const std::string& new_id) {
    if (prompts.empty()) {
        throw ConfigError("merge_prompts: empty prompt list");
    }
    HeaderStyle style = prompts.front().header_style;
    for (const auto& p : prompts) {
        if (p.header_style != style) {
            throw ConfigError("merge_prompts: mixed header styles (" + prompts.front().id +
                              " vs " + p.id + ")");
        }
    }
    PromptSpec merged;
    merged.id = new_id;
    merged.title = "Merged (" + std::to_string(prompts.size()) + " prompts)";
    merged.role = PromptRole::Baseline;
    merged.header_style = style;
    merged.default_repetitions = 1;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        if (i > 0) merged.body += "\n\n";
        merged.body += "=== Criterion " + std::to_string(i + 1) + ": " +
                       prompts[i].title + " ===\n";
        merged.body += prompts[i].body;
    }
    return merged;
}

}  // namespace proofjudge
