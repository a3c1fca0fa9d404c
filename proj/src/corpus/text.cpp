#include "cmlab/corpus/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace cmlab::corpus {

namespace {

template <class F>
bool any_code_point(std::string_view s, F&& pred) {
  int32_t i = 0;
  const auto len = static_cast<int32_t>(s.size());
  while (i < len) {
    UChar32 c;
    U8_NEXT(s.data(), i, len, c);
    if (c < 0) throw std::invalid_argument("invalid UTF-8 in token");
    if (pred(c)) return true;
  }
  return false;
}

}  // namespace

std::string normalize_surface(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  icu::UnicodeString text = icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  text.toLower(icu::Locale::getRoot());
  icu::UnicodeString normalized = nfc->normalize(text, status);
  if (U_FAILURE(status)) throw std::invalid_argument("cannot normalize token");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

bool has_letter(std::string_view utf8) {
  return any_code_point(utf8, [](UChar32 c) { return u_isalpha(c) != 0; });
}

bool contains_whitespace(std::string_view utf8) {
  return any_code_point(utf8, [](UChar32 c) { return u_isUWhiteSpace(c) != 0; });
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  int32_t i = 0;
  const auto len = static_cast<int32_t>(text.size());
  while (i < len) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(text.data(), i, len, c);
    if (c < 0) throw std::invalid_argument("invalid UTF-8 in text");
    if (u_isUWhiteSpace(c)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.append(text.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace cmlab::corpus
