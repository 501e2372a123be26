#include "cascademl/text_io.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace cascademl {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw FormatError("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

std::string escape_token(std::string_view text) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  if (text.empty()) return "%00";
  for (unsigned char c : text) {
    if (c <= ' ' || c == '%' || c == 0x7F) {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    } else {
      out += static_cast<char>(c);
    }
  }
  return out;
}

std::string unescape_token(std::string_view token) {
  if (token == "%00") return {};
  std::string out;
  for (std::size_t i = 0; i < token.size(); ++i) {
    if (token[i] == '%' && i + 2 < token.size()) {
      unsigned value = 0;
      auto [ptr, ec] = std::from_chars(token.data() + i + 1, token.data() + i + 3, value, 16);
      if (ec != std::errc() || ptr != token.data() + i + 3) throw FormatError("bad escape in token");
      out += static_cast<char>(value);
      i += 2;
    } else if (token[i] == '%') {
      throw FormatError("truncated escape in token");
    } else {
      out += token[i];
    }
  }
  return out;
}

std::string TokenReader::next() {
  if (has_pending_) {
    has_pending_ = false;
    return std::move(pending_);
  }
  std::string token;
  if (!(in_ >> token)) throw FormatError("unexpected end of input");
  return token;
}

std::string TokenReader::peek() {
  if (!has_pending_) {
    pending_ = next();
    has_pending_ = true;
  }
  return pending_;
}

void TokenReader::expect(std::string_view keyword) {
  const auto token = next();
  if (token != keyword)
    throw FormatError("expected '" + std::string(keyword) + "', found '" + token + "'");
}

double TokenReader::next_double() {
  const auto token = next();
  if (token == "nan") return std::nan("");
  double value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw FormatError("expected a number, found '" + token + "'");
  return value;
}

long long TokenReader::next_int() {
  const auto token = next();
  long long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw FormatError("expected an integer, found '" + token + "'");
  return value;
}

int TokenReader::next_index(long long upper_exclusive) {
  const auto v = next_int();
  if (v < 0 || v >= upper_exclusive) throw FormatError("index " + std::to_string(v) + " out of range");
  return static_cast<int>(v);
}

}  // namespace cascademl
