#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace leakcomp {

// Abstract memory-block name. Blocks 0..25 render as the letters A..Z,
// larger ids render as "b<n>".
using BlockId = std::int32_t;

// Marks an invalid cache line inside a configuration's content.
inline constexpr BlockId kNoBlock = -1;

// A finite sequence of memory accesses; the empty trace is permitted.
using Trace = std::vector<BlockId>;

std::string block_to_string(BlockId block);

// Accepts a single letter A..Z or a "b<n>" token.
BlockId parse_block(std::string_view text);

// "ABAC" when every block fits a letter, comma-separated tokens otherwise.
std::string trace_to_string(const Trace& trace);

// Accepts concatenated letters ("ABACBACBA") or comma-separated block
// tokens ("b0,b1,b0,b2"). The empty string is the empty trace.
Trace parse_trace(std::string_view text);

struct Rational {
  long long num = 0;
  long long den = 1;
};

std::string to_string(const Rational& value);

}  // namespace leakcomp
