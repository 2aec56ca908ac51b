#pragma once

#include <string_view>
#include <vector>

namespace immerse::parse_detail {

struct Token {
    std::string_view text;
    int col = 0;  // 1-based
};

std::vector<Token> tokenize_line(std::string_view line);
std::vector<std::string_view> split_lines(std::string_view text);
bool parse_number(std::string_view s, double& out);

}  // namespace immerse::parse_detail
