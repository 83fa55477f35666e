#pragma once

// Tokenization used for both count statistics and embedding lookup. The two
// consumers must share one tokenizer, otherwise weight keys and lookup keys
// diverge.
//
// Default pipeline: UTF-8 decode (bad bytes become U+FFFD) -> NFC normalize
// -> per-code-point lowercase -> split on maximal runs of characters outside
// the Unicode letter/digit classes -> drop tokens shorter than
// min_token_len code points.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/uchar.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>
#include <unicode/utf16.h>
#include <unicode/utf8.h>

namespace tfcr {

struct TokenizerConfig {
  bool lowercase = true;
  std::size_t min_token_len = 1;  // counted in code points
};

using TokenSequence = std::vector<std::string>;

namespace detail {

inline std::vector<UChar> utf8_to_utf16(std::string_view text) {
  std::vector<UChar> buf(text.size() + 1);
  int32_t len = 0;
  UErrorCode err = U_ZERO_ERROR;
  u_strFromUTF8WithSub(buf.data(), static_cast<int32_t>(buf.size()), &len,
                       text.data(), static_cast<int32_t>(text.size()), 0xFFFD,
                       nullptr, &err);
  if (U_FAILURE(err)) throw std::runtime_error("tokenize: UTF-8 decode failed");
  buf.resize(static_cast<std::size_t>(len));
  return buf;
}

inline std::vector<UChar> nfc_normalize(const std::vector<UChar>& src) {
  UErrorCode err = U_ZERO_ERROR;
  const UNormalizer2* nfc = unorm2_getNFCInstance(&err);
  if (U_FAILURE(err)) throw std::runtime_error("tokenize: no NFC normalizer");
  int32_t need = unorm2_normalize(nfc, src.data(),
                                  static_cast<int32_t>(src.size()), nullptr, 0,
                                  &err);
  if (err != U_BUFFER_OVERFLOW_ERROR && U_FAILURE(err))
    throw std::runtime_error("tokenize: NFC normalization failed");
  err = U_ZERO_ERROR;
  std::vector<UChar> out(static_cast<std::size_t>(need) + 1);
  int32_t len = unorm2_normalize(nfc, src.data(),
                                 static_cast<int32_t>(src.size()), out.data(),
                                 static_cast<int32_t>(out.size()), &err);
  if (U_FAILURE(err)) throw std::runtime_error("tokenize: NFC normalization failed");
  out.resize(static_cast<std::size_t>(len));
  return out;
}

}  // namespace detail

inline TokenSequence tokenize(std::string_view text,
                              const TokenizerConfig& cfg = {}) {
  TokenSequence tokens;
  if (text.empty()) return tokens;

  std::vector<UChar> u16 = detail::nfc_normalize(detail::utf8_to_utf16(text));

  std::string current;
  std::size_t current_cps = 0;
  auto flush = [&] {
    if (current_cps >= cfg.min_token_len && !current.empty())
      tokens.push_back(current);
    current.clear();
    current_cps = 0;
  };

  int32_t i = 0;
  const int32_t len = static_cast<int32_t>(u16.size());
  while (i < len) {
    UChar32 cp;
    U16_NEXT(u16.data(), i, len, cp);
    if (u_isalnum(cp)) {
      if (cfg.lowercase) cp = u_tolower(cp);
      char buf[U8_MAX_LENGTH];
      int32_t n = 0;
      U8_APPEND_UNSAFE(buf, n, cp);
      current.append(buf, static_cast<std::size_t>(n));
      ++current_cps;
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

}  // namespace tfcr
