#include "immerse/verify.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "immerse/trace.hpp"
#include "parse_util.hpp"

namespace immerse {

namespace {

struct Assertion {
    enum class Type { Count, Order } type;
    std::string kind;
    std::vector<std::pair<std::string, std::string>> filters;  // Count
    std::string op;                                            // Count
    long expected_count = 0;                                   // Count
    long index = 0;                                            // Order
    std::string key;                                           // Order
    std::string value;                                         // Order
    std::string source_line;
};

bool compare(long lhs, const std::string& op, long rhs) {
    if (op == "==") return lhs == rhs;
    if (op == "!=") return lhs != rhs;
    if (op == "<=") return lhs <= rhs;
    if (op == ">=") return lhs >= rhs;
    if (op == "<") return lhs < rhs;
    if (op == ">") return lhs > rhs;
    return false;
}

bool parse_long(std::string_view s, long& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

bool read_lines(const std::string& path, std::vector<std::string>& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return true;
}

}  // namespace

int verify_trace(const std::string& trace_path, const std::string& assertions_path,
                 std::ostream& out) {
    std::vector<std::string> trace_lines;
    if (!read_lines(trace_path, trace_lines)) {
        out << "error: cannot read trace '" << trace_path << "'\n";
        return 2;
    }
    std::vector<TraceLine> records;
    for (size_t i = 0; i < trace_lines.size(); ++i) {
        if (trace_lines[i].empty()) continue;
        TraceLine rec;
        std::string msg;
        if (!parse_trace_line(trace_lines[i], rec, msg)) {
            out << trace_path << ":" << (i + 1) << ": malformed trace line: " << msg << "\n";
            return 2;
        }
        records.push_back(std::move(rec));
    }

    std::string assert_text;
    {
        std::ifstream in(assertions_path, std::ios::binary);
        if (!in) {
            out << "error: cannot read assertions '" << assertions_path << "'\n";
            return 2;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        assert_text = ss.str();
    }

    std::vector<Assertion> assertions;
    auto lines = parse_detail::split_lines(assert_text);
    for (size_t li = 0; li < lines.size(); ++li) {
        auto tokens = parse_detail::tokenize_line(lines[li]);
        if (tokens.empty()) continue;
        auto fail = [&](const std::string& msg) {
            out << assertions_path << ":" << (li + 1) << ": " << msg << "\n";
            return 2;
        };
        if (tokens[0].text != "expect" || tokens.size() < 3) {
            return fail("expected 'expect count ...' or 'expect order ...'");
        }
        Assertion a;
        a.source_line = std::string(lines[li]);
        if (tokens[1].text == "count") {
            a.type = Assertion::Type::Count;
            size_t ti = 2;
            for (; ti < tokens.size(); ++ti) {
                std::string_view t = tokens[ti].text;
                size_t eq = t.find('=');
                if (eq == std::string_view::npos || t == "==" || t[0] == '=' || t[0] == '!' ||
                    t[0] == '<' || t[0] == '>') {
                    break;
                }
                std::string key(t.substr(0, eq));
                std::string value(t.substr(eq + 1));
                if (key == "kind") {
                    a.kind = value;
                } else {
                    a.filters.emplace_back(key, value);
                }
            }
            if (a.kind.empty()) return fail("count assertion needs kind=<Kind>");
            if (ti + 2 != tokens.size()) return fail("expected '<op> <int>' at line end");
            a.op = std::string(tokens[ti].text);
            if (a.op != "==" && a.op != "!=" && a.op != "<=" && a.op != ">=" && a.op != "<" &&
                a.op != ">") {
                return fail("unknown comparison '" + a.op + "'");
            }
            if (!parse_long(tokens[ti + 1].text, a.expected_count)) {
                return fail("bad integer '" + std::string(tokens[ti + 1].text) + "'");
            }
        } else if (tokens[1].text == "order") {
            if (tokens.size() != 5 || tokens[3].text != "==") {
                return fail("expected 'expect order <Kind>[<i>].<key> == <value>'");
            }
            a.type = Assertion::Type::Order;
            std::string_view spec = tokens[2].text;
            size_t lb = spec.find('[');
            size_t rb = spec.find(']');
            size_t dot = spec.find('.', rb == std::string_view::npos ? 0 : rb);
            if (lb == std::string_view::npos || rb == std::string_view::npos ||
                dot == std::string_view::npos || rb < lb) {
                return fail("expected '<Kind>[<i>].<key>'");
            }
            a.kind = std::string(spec.substr(0, lb));
            if (!parse_long(spec.substr(lb + 1, rb - lb - 1), a.index) || a.index < 0) {
                return fail("bad index");
            }
            a.key = std::string(spec.substr(dot + 1));
            a.value = std::string(tokens[4].text);
            if (a.kind.empty() || a.key.empty()) return fail("expected '<Kind>[<i>].<key>'");
        } else {
            return fail("expected 'count' or 'order'");
        }
        assertions.push_back(std::move(a));
    }

    for (const Assertion& a : assertions) {
        if (a.type == Assertion::Type::Count) {
            long count = 0;
            for (const TraceLine& rec : records) {
                if (rec.kind != a.kind) continue;
                bool match = true;
                for (const auto& [k, v] : a.filters) {
                    const std::string* field = rec.field(k);
                    if (!field || *field != v) {
                        match = false;
                        break;
                    }
                }
                if (match) ++count;
            }
            if (!compare(count, a.op, a.expected_count)) {
                out << "FAIL: " << a.source_line << " (actual " << count << ")\n";
                return 1;
            }
        } else {
            long seen = 0;
            const TraceLine* found = nullptr;
            for (const TraceLine& rec : records) {
                if (rec.kind != a.kind) continue;
                if (seen++ == a.index) {
                    found = &rec;
                    break;
                }
            }
            if (!found) {
                out << "FAIL: " << a.source_line << " (only " << seen << " " << a.kind
                    << " records)\n";
                return 1;
            }
            const std::string* field = found->field(a.key);
            if (!field) {
                out << "FAIL: " << a.source_line << " (no field '" << a.key << "')\n";
                return 1;
            }
            if (*field != a.value) {
                out << "FAIL: " << a.source_line << " (actual " << *field << ")\n";
                return 1;
            }
        }
    }
    out << "ok: " << assertions.size() << " assertions hold\n";
    return 0;
}

int replay_check(const std::string& path_a, const std::string& path_b, std::ostream& out) {
    std::ifstream a(path_a, std::ios::binary);
    std::ifstream b(path_b, std::ios::binary);
    if (!a) {
        out << "error: cannot read '" << path_a << "'\n";
        return 2;
    }
    if (!b) {
        out << "error: cannot read '" << path_b << "'\n";
        return 2;
    }
    std::string la, lb;
    long line = 0;
    while (true) {
        bool got_a = static_cast<bool>(std::getline(a, la));
        bool got_b = static_cast<bool>(std::getline(b, lb));
        ++line;
        if (!got_a && !got_b) break;
        if (got_a != got_b || la != lb) {
            out << "traces differ at line " << line << ":\n";
            out << "  a: " << (got_a ? la : "<eof>") << "\n";
            out << "  b: " << (got_b ? lb : "<eof>") << "\n";
            return 1;
        }
    }
    out << "traces identical\n";
    return 0;
}

}  // namespace immerse
