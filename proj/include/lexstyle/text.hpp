// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lexstyle {

// Word-level tokenizer shared by the scorer and the language model:
// ASCII-lowercase, split on whitespace, strip leading/trailing ASCII
// punctuation, drop tokens that end up empty.
std::vector<std::string> tokenize(std::string_view text);

// Lowercased, punctuation-stripped form of a single token ("" if nothing is left).
std::string normalize_token(std::string_view token);

// Splits on runs of blank lines (lines holding only whitespace). Paragraph text
// is returned with its internal newlines intact and surrounding space trimmed.
std::vector<std::string> split_paragraphs(std::string_view text);

std::string join(const std::vector<std::string>& words, std::string_view sep = " ");

}  // namespace lexstyle
