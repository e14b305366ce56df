#include "leakcomp/block.hpp"

#include <charconv>
#include <stdexcept>

namespace leakcomp {

namespace {

BlockId parse_block_token(std::string_view token) {
  if (token.size() == 1 && token[0] >= 'A' && token[0] <= 'Z') {
    return token[0] - 'A';
  }
  if (token.size() >= 2 && token[0] == 'b') {
    BlockId value = 0;
    const char* first = token.data() + 1;
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc() && ptr == last && value >= 0) {
      return value;
    }
  }
  throw std::invalid_argument("bad block literal '" + std::string(token) +
                              "': expected A-Z or b<n>");
}

}  // namespace

std::string block_to_string(BlockId block) {
  if (block < 0) {
    throw std::invalid_argument("block ids are non-negative");
  }
  if (block <= 25) {
    return std::string(1, static_cast<char>('A' + block));
  }
  return "b" + std::to_string(block);
}

BlockId parse_block(std::string_view text) { return parse_block_token(text); }

std::string trace_to_string(const Trace& trace) {
  bool letters = true;
  for (BlockId block : trace) {
    if (block > 25) {
      letters = false;
      break;
    }
  }
  std::string out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!letters && i > 0) out += ',';
    out += block_to_string(trace[i]);
  }
  return out;
}

Trace parse_trace(std::string_view text) {
  Trace trace;
  if (text.empty()) return trace;
  if (text.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t comma = text.find(',', start);
      if (comma == std::string_view::npos) comma = text.size();
      trace.push_back(parse_block_token(text.substr(start, comma - start)));
      start = comma + 1;
    }
    return trace;
  }
  bool letters = true;
  for (char c : text) {
    if (c < 'A' || c > 'Z') {
      letters = false;
      break;
    }
  }
  if (letters) {
    trace.reserve(text.size());
    for (char c : text) trace.push_back(c - 'A');
    return trace;
  }
  // a single "b<n>" token
  trace.push_back(parse_block_token(text));
  return trace;
}

std::string to_string(const Rational& value) {
  if (value.den == 1) return std::to_string(value.num);
  return std::to_string(value.num) + "/" + std::to_string(value.den);
}

}  // namespace leakcomp
