#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace agctl {

/// Extracts the LAST bracketed numeric list of the expected length from free
/// text. Accepts integers, decimals and scientific notation; ignores prose
/// and code fences around the brackets. Throws ParseFailure (raw text
/// preserved) when no such list exists.
std::vector<double> parse_float_array(const std::string& text, std::size_t expected_len);

/// All bracketed lists of non-negative integers found in the text, in order.
std::vector<std::vector<int>> find_int_arrays(const std::string& text);

/// The last bracketed list of non-negative integers; throws ParseFailure
/// when none exists. Used for proposed state paths.
std::vector<int> parse_state_path(const std::string& text);

/// Case-insensitive scan for standalone True/False tokens; the last
/// occurrence wins. Throws ParseFailure when neither appears.
bool parse_bool(const std::string& text);

/// Same scan without the failure path, for replies where the boolean is
/// optional side information.
std::optional<bool> try_parse_bool(const std::string& text);

/// Fixed-precision number rendering used for prompt substitution
/// (6 significant digits).
std::string format_number(double value);

}  // namespace agctl
