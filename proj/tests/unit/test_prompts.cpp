#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "proofjudge/errors.hpp"
#include "proofjudge/prompts.hpp"

using namespace proofjudge;

namespace {

const PromptBundle& default_bundle() {
    static PromptBundle bundle = load_bundle(TEST_BUNDLE_DIR);
    return bundle;
}

ProofRecord record_with(const std::string& problem, const std::string& proof) {
    ProofRecord r;
    r.id = "x";
    r.problem = problem;
    r.proof = proof;
    r.human_score = 7;
    return r;
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace

TEST_CASE("default bundle has the full prompt roster") {
    const auto& bundle = default_bundle();
    CHECK(list_prompts(bundle).size() == 23);
    CHECK(list_prompts(bundle, PromptRole::Baseline).size() == 3);
    CHECK(list_prompts(bundle, PromptRole::ErrorDetection).size() == 12);

    auto generals = list_prompts(bundle, PromptRole::EnsembleGeneral);
    REQUIRE(generals.size() == 1);
    CHECK(generals[0].id == "general-grading");
    CHECK(generals[0].default_repetitions == 5);
    CHECK(list_prompts(bundle, PromptRole::EnsembleSpecialist).size() == 7);

    // Roster order is manifest order.
    CHECK(bundle.prompts[0].id == "imobench");
    CHECK(bundle.prompts[1].id == "gimo");
    CHECK(bundle.prompts[2].id == "proofbench7pt");

    // Aux assets live outside the judging roster.
    CHECK(bundle.aux_prompts.size() == 2);
    CHECK(bundle.get_aux("error-annotation").header_style == HeaderStyle::Caps);
    CHECK(bundle.get_aux("error-match").header_style == HeaderStyle::Caps);
}

TEST_CASE("header style invariants hold in the default bundle") {
    for (const auto& p : default_bundle().prompts) {
        if (p.role == PromptRole::ErrorDetection) {
            CHECK(p.header_style == HeaderStyle::Bracketed);
        }
        if (p.role == PromptRole::EnsembleGeneral ||
            p.role == PromptRole::EnsembleSpecialist) {
            CHECK(p.header_style == HeaderStyle::Caps);
            if (p.role == PromptRole::EnsembleSpecialist) {
                CHECK(p.default_repetitions == 1);
            }
        }
        CHECK(!p.body.empty());
        // The boxed-verdict instruction ships inside every judging body.
        CHECK(p.body.find("\\boxed{") != std::string::npos);
    }
}

TEST_CASE("every prompt body is verbatim the checksummed file") {
    // The IMOBench baseline and the Standard detection prompt share text.
    const auto& bundle = default_bundle();
    CHECK(bundle.get("imobench").body == bundle.get("standard").body);
}

TEST_CASE("render appends the two header blocks byte-exactly") {
    const auto& bundle = default_bundle();
    auto record = record_with("P", "S");

    SUBCASE("bracketed") {
        const auto& prompt = bundle.get("standard");
        std::string message = render(prompt, record);
        CHECK(message == prompt.body + "\n\n[Problem]\nP\n\n[Solution]\nS");
    }
    SUBCASE("caps") {
        const auto& prompt = bundle.get("general-grading");
        std::string message = render(prompt, record);
        CHECK(message == prompt.body + "\n\nPROBLEM\nP\n\nPROOF\nS");
    }
    SUBCASE("empty problem or proof is an error") {
        CHECK_THROWS_AS(render(bundle.get("standard"), record_with("", "S")), DataError);
        CHECK_THROWS_AS(render(bundle.get("standard"), record_with("P", "")), DataError);
    }
}

TEST_CASE("render is byte-deterministic and embeds each text exactly once") {
    const auto& bundle = default_bundle();
    auto record = record_with("UNIQUE_PROBLEM_MARKER_84229", "UNIQUE_PROOF_MARKER_13377");
    for (const auto& prompt : bundle.prompts) {
        std::string a = render(prompt, record);
        std::string b = render(prompt, record);
        CHECK(a == b);
        CHECK(count_occurrences(a, record.problem) == 1);
        CHECK(count_occurrences(a, record.proof) == 1);
    }
}

TEST_CASE("merge_prompts concatenates bodies with numbered sections") {
    const auto& bundle = default_bundle();
    auto detection = list_prompts(bundle, PromptRole::ErrorDetection);

    SUBCASE("all twelve, in order") {
        auto merged = merge_prompts(detection, "merged-12");
        CHECK(merged.id == "merged-12");
        CHECK(merged.role == PromptRole::Baseline);
        CHECK(merged.default_repetitions == 1);
        CHECK(merged.header_style == HeaderStyle::Bracketed);
        std::size_t pos = 0;
        for (const auto& p : detection) {
            auto found = merged.body.find(p.body, pos);
            REQUIRE(found != std::string::npos);
            pos = found + p.body.size();
        }
        CHECK(merged.body.find("=== Criterion 1: Standard ===") != std::string::npos);
        CHECK(merged.body.find("=== Criterion 12: False Lemma Verifier ===") !=
              std::string::npos);
    }
    SUBCASE("single prompt keeps its body plus a section header") {
        std::vector<PromptSpec> one = {bundle.get("standard")};
        auto merged = merge_prompts(one, "solo");
        CHECK(merged.body ==
              "=== Criterion 1: Standard ===\n" + bundle.get("standard").body);
    }
    SUBCASE("mixed header styles are rejected") {
        std::vector<PromptSpec> mixed = {bundle.get("standard"),
                                         bundle.get("general-grading")};
        CHECK_THROWS_AS(merge_prompts(mixed, "bad"), ConfigError);
    }
    SUBCASE("empty list is rejected") {
        CHECK_THROWS_AS(merge_prompts(std::span<const PromptSpec>{}, "bad"), ConfigError);
    }
}

TEST_CASE("bundle tampering is detected by checksums") {
    auto tmp = std::filesystem::temp_directory_path() / "pj_bundle_tamper";
    std::filesystem::remove_all(tmp);
    std::filesystem::copy(TEST_BUNDLE_DIR, tmp);
    {
        std::ofstream out(tmp / "standard.txt", std::ios::app);
        out << "sneaky edit\n";
    }
    CHECK_THROWS_WITH_AS(load_bundle(tmp), doctest::Contains("checksum mismatch"),
                         DataError);
    std::filesystem::remove_all(tmp);
}

TEST_CASE("unknown names raise config errors") {
    CHECK_THROWS_AS(prompt_role_from_string("nonsense"), ConfigError);
    CHECK_THROWS_AS(header_style_from_string("fancy"), ConfigError);
    CHECK_THROWS_WITH_AS(default_bundle().get("no-such-prompt"),
                         doctest::Contains("no-such-prompt"), ConfigError);
    CHECK_THROWS_AS(default_bundle().get_aux("standard"), ConfigError);
}

TEST_CASE("missing bundle directory is a data error") {
    CHECK_THROWS_AS(load_bundle("/nonexistent/bundle/dir"), DataError);
}
