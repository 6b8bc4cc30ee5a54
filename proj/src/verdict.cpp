#include "proofjudge/verdict.hpp"

#include <cctype>

#include "proofjudge/errors.hpp"

namespace proofjudge {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::toupper(static_cast<unsigned char>(a[i])) !=
            std::toupper(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

std::string_view trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// If a "\boxed"/"\lboxed" macro starts at `pos`, returns the trimmed brace
// body. Whitespace is allowed between the macro name and the opening brace.
std::optional<std::string_view> boxed_body_at(std::string_view text,
                                              std::size_t pos) {
    std::size_t i = pos + 1;  // past the backslash
    if (i < text.size() && text[i] == 'l') ++i;
    if (text.compare(i, 5, "boxed") != 0) return std::nullopt;
    i += 5;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size() || text[i] != '{') return std::nullopt;
    std::size_t close = text.find('}', i + 1);
    if (close == std::string_view::npos) return std::nullopt;
    return trim(text.substr(i + 1, close - i - 1));
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Correct: return "correct";
        case Verdict::Incorrect: return "incorrect";
        case Verdict::Unparseable: return "unparseable";
    }
    return "unparseable";
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "correct") return Verdict::Correct;
    if (s == "incorrect") return Verdict::Incorrect;
    if (s == "unparseable") return Verdict::Unparseable;
    throw DataError("unknown verdict: " + s);
}

std::optional<bool> parse_boxed_binary(std::string_view text,
                                       std::string_view positive_word,
                                       std::string_view negative_word) {
    std::optional<bool> last;
    std::size_t pos = 0;
    while ((pos = text.find('\\', pos)) != std::string_view::npos) {
        if (auto body = boxed_body_at(text, pos)) {
            if (iequals(*body, positive_word)) {
                last = true;
            } else if (iequals(*body, negative_word)) {
                last = false;
            }
        }
        ++pos;
    }
    return last;
}

Verdict parse_verdict(std::string_view text) {
    auto result = parse_boxed_binary(text, "CORRECT", "INCORRECT");
    if (!result) return Verdict::Unparseable;
    return *result ? Verdict::Correct : Verdict::Incorrect;
}

}  // namespace proofjudge
