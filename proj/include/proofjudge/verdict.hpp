#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace proofjudge {

/// Binary judge verdict extracted from free-form model output.
enum class Verdict { Correct, Incorrect, Unparseable };

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

/// Extracts the verdict from a judge response.
///
/// Scans for "\boxed{...}" and "\lboxed{...}" tokens whose body is CORRECT
/// or INCORRECT (case-insensitive, surrounding whitespace tolerated). The
/// last such token wins; boxed tokens with any other body (e.g. a boxed
/// final answer like \boxed{42}) are ignored. Returns Unparseable when no
/// verdict token is present. Pure and total.
Verdict parse_verdict(std::string_view text);

/// Last-occurrence extraction of a binary boxed token pair, same scanning
/// discipline as parse_verdict. Returns true when the last recognized token
/// is `positive_word`, false for `negative_word`, nullopt when neither
/// occurs. Word comparison is case-insensitive.
std::optional<bool> parse_boxed_binary(std::string_view text,
                                       std::string_view positive_word,
                                       std::string_view negative_word);

}  // namespace proofjudge
