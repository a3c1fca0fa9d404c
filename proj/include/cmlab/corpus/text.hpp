#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cmlab::corpus {

/// Lowercase + Unicode NFC. Input must be valid UTF-8.
std::string normalize_surface(std::string_view raw);

/// True if the string contains at least one alphabetic code point.
bool has_letter(std::string_view utf8);

bool contains_whitespace(std::string_view utf8);

/// Splits on ASCII and Unicode whitespace.
std::vector<std::string> split_whitespace(std::string_view text);

}  // namespace cmlab::corpus
