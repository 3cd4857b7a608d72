#include "agctl/parsing.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>

#include "agctl/errors.hpp"

namespace agctl {

namespace {

// Parses the contents between '[' and ']' as a comma-separated numeric list.
// Returns nullopt if anything other than numbers, commas and whitespace
// appears.
std::optional<std::vector<double>> try_parse_list(const std::string& body) {
    std::vector<double> values;
    std::size_t pos = 0;
    const auto skip_ws = [&] {
        while (pos < body.size() && std::isspace(static_cast<unsigned char>(body[pos]))) ++pos;
    };
    skip_ws();
    while (pos < body.size()) {
        const char* start = body.c_str() + pos;
        char* end = nullptr;
        const double v = std::strtod(start, &end);
        if (end == start || !std::isfinite(v)) return std::nullopt;
        values.push_back(v);
        pos += static_cast<std::size_t>(end - start);
        skip_ws();
        if (pos < body.size()) {
            if (body[pos] != ',') return std::nullopt;
            ++pos;
            skip_ws();
            if (pos == body.size()) return std::nullopt;  // trailing comma
        }
    }
    if (values.empty()) return std::nullopt;
    return values;
}

std::vector<std::vector<double>> all_numeric_lists(const std::string& text) {
    std::vector<std::vector<double>> lists;
    std::size_t open = text.find('[');
    while (open != std::string::npos) {
        const std::size_t close = text.find(']', open + 1);
        if (close == std::string::npos) break;
        if (auto values = try_parse_list(text.substr(open + 1, close - open - 1)))
            lists.push_back(std::move(*values));
        open = text.find('[', open + 1);
    }
    return lists;
}

}  // namespace

std::vector<double> parse_float_array(const std::string& text, std::size_t expected_len) {
    const auto lists = all_numeric_lists(text);
    for (auto it = lists.rbegin(); it != lists.rend(); ++it) {
        if (it->size() == expected_len) return *it;
    }
    throw ParseFailure(
        fmt::format("no bracketed numeric list of length {} found", expected_len), text);
}

std::vector<std::vector<int>> find_int_arrays(const std::string& text) {
    std::vector<std::vector<int>> result;
    for (const auto& list : all_numeric_lists(text)) {
        std::vector<int> ints;
        bool ok = true;
        for (double v : list) {
            const double rounded = std::round(v);
            if (v < 0 || std::abs(v - rounded) > 0) {
                ok = false;
                break;
            }
            ints.push_back(static_cast<int>(rounded));
        }
        if (ok) result.push_back(std::move(ints));
    }
    return result;
}

std::vector<int> parse_state_path(const std::string& text) {
    const auto arrays = find_int_arrays(text);
    if (arrays.empty())
        throw ParseFailure("no bracketed state list found", text);
    return arrays.back();
}

std::optional<bool> try_parse_bool(const std::string& text) {
    std::optional<bool> result;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto is_word = [&](const char* word, std::size_t len) {
            if (i + len > text.size()) return false;
            for (std::size_t k = 0; k < len; ++k) {
                if (std::tolower(static_cast<unsigned char>(text[i + k])) != word[k])
                    return false;
            }
            const bool left_ok =
                i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
            const bool right_ok = i + len == text.size() ||
                                  !std::isalnum(static_cast<unsigned char>(text[i + len]));
            return left_ok && right_ok;
        };
        if (is_word("true", 4)) result = true;
        else if (is_word("false", 5)) result = false;
    }
    return result;
}

bool parse_bool(const std::string& text) {
    if (auto b = try_parse_bool(text)) return *b;
    throw ParseFailure("no True/False token found", text);
}

std::string format_number(double value) { return fmt::format("{:.6g}", value); }

}  // namespace agctl
