#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace encyclink::utf8 {

// Decodes UTF-8 into Unicode scalar values. Invalid sequences decode to
// U+FFFD one byte at a time, so decoding never fails.
std::u32string decode(std::string_view s);
std::string encode(std::u32string_view s);
void append(std::string& out, char32_t cp);

// Length in Unicode scalar values.
std::size_t length(std::string_view s);

// First n scalar values of s.
std::string prefix(std::string_view s, std::size_t n);

bool is_letter(char32_t c);
bool is_upper(char32_t c);
bool is_digit(char32_t c);
bool is_space(char32_t c);
char32_t to_upper(char32_t c);

}  // namespace encyclink::utf8
