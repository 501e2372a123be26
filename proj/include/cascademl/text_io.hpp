#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cascademl {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Percent-escapes whitespace and '%' so a name survives as one token.
std::string escape_token(std::string_view text);
std::string unescape_token(std::string_view token);

/// Whitespace-separated token reader for the versioned model formats.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string next();
  /// Next token must equal `keyword`.
  void expect(std::string_view keyword);
  double next_double();
  long long next_int();
  int next_index(long long upper_exclusive);
  std::string peek();

 private:
  std::istream& in_;
  std::string pending_;
  bool has_pending_ = false;
};

}  // namespace cascademl
