#include <charconv>

#include "immerse/sceneio.hpp"
#include "parse_util.hpp"

namespace immerse {

using namespace parse_detail;

ParseResult<ScenarioDoc> parse_scenario(std::string_view text) {
    ScenarioDoc doc;
    bool have_run_until = false;
    double last_t = -1.0;
    auto lines = split_lines(text);
    int last_line = 1;

    for (size_t li = 0; li < lines.size(); ++li) {
        int line_no = static_cast<int>(li) + 1;
        auto fail = [&](int col, const std::string& message) {
            return ParseResult<ScenarioDoc>{std::nullopt, {line_no, col, message}};
        };

        auto tokens = tokenize_line(lines[li]);
        if (tokens.empty()) continue;
        last_line = line_no;
        if (have_run_until) {
            return fail(tokens[0].col, "no commands allowed after run_until");
        }

        if (tokens[0].text == "run_until") {
            if (tokens.size() != 2) return fail(tokens[0].col, "expected 'run_until <t>'");
            double t = 0.0;
            if (!parse_number(tokens[1].text, t) || !(t >= 0.0)) {
                return fail(tokens[1].col, "bad run_until time");
            }
            if (t < last_t) return fail(tokens[1].col, "run_until precedes earlier commands");
            doc.run_until = t;
            have_run_until = true;
            continue;
        }

        if (tokens[0].text != "at") {
            return fail(tokens[0].col, "expected 'at' or 'run_until'");
        }
        if (tokens.size() < 3) return fail(tokens.back().col, "expected 'at <t> <command>'");

        ScenarioCmd cmd;
        if (!parse_number(tokens[1].text, cmd.t) || !(cmd.t >= 0.0)) {
            return fail(tokens[1].col, "bad timestamp");
        }
        if (cmd.t < last_t) {
            return fail(tokens[1].col, "timestamps must be non-decreasing");
        }
        last_t = cmd.t;

        std::string_view verb = tokens[2].text;
        if (verb == "pose") {
            if (tokens.size() != 7 && tokens.size() != 11) {
                return fail(tokens[2].col,
                            "expected 'pose <Role> <x> <y> <z> [<ax> <ay> <az> <angle>]'");
            }
            cmd.type = ScenarioCmd::Type::Pose;
            auto role = device_role_from(tokens[3].text);
            if (!role) {
                return fail(tokens[3].col, "unknown device role '" + std::string(tokens[3].text) +
                                               "' (Head LeftHand RightHand LeftFoot RightFoot)");
            }
            cmd.role = *role;
            double v[3];
            for (int i = 0; i < 3; ++i) {
                if (!parse_number(tokens[4 + i].text, v[i])) {
                    return fail(tokens[4 + i].col, "bad coordinate");
                }
            }
            cmd.pos = {v[0], v[1], v[2]};
            if (tokens.size() == 11) {
                std::array<double, 4> aa{};
                for (int i = 0; i < 4; ++i) {
                    if (!parse_number(tokens[7 + i].text, aa[i])) {
                        return fail(tokens[7 + i].col, "bad axis-angle component");
                    }
                }
                cmd.rot = aa;
            }
        } else if (verb == "press") {
            if (tokens.size() != 4) return fail(tokens[2].col, "expected 'press <node-path>'");
            cmd.type = ScenarioCmd::Type::Press;
            cmd.path = std::string(tokens[3].text);
        } else if (verb == "trigger") {
            if (tokens.size() != 5) {
                return fail(tokens[2].col, "expected 'trigger <left|right> <down|up>'");
            }
            cmd.type = ScenarioCmd::Type::Trigger;
            if (tokens[3].text == "left") {
                cmd.hand = Hand::Left;
            } else if (tokens[3].text == "right") {
                cmd.hand = Hand::Right;
            } else {
                return fail(tokens[3].col, "hand must be 'left' or 'right'");
            }
            if (tokens[4].text == "down") {
                cmd.down = true;
            } else if (tokens[4].text == "up") {
                cmd.down = false;
            } else {
                return fail(tokens[4].col, "expected 'down' or 'up'");
            }
        } else {
            return fail(tokens[2].col, "unknown command '" + std::string(verb) + "'");
        }
        doc.commands.push_back(std::move(cmd));
    }

    if (!have_run_until) {
        return {std::nullopt, {last_line, 1, "missing run_until"}};
    }
    return {std::move(doc), {}};
}

std::string pretty_print(const ScenarioDoc& doc) {
    std::string out;
    auto num = [](double v) {
        char buf[64];
        auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        (void)ec;
        return std::string(buf, p);
    };
    for (const auto& c : doc.commands) {
        out += "at " + num(c.t) + " ";
        switch (c.type) {
        case ScenarioCmd::Type::Pose:
            out += "pose " + std::string(device_role_name(c.role)) + " " + num(c.pos.x) + " " +
                   num(c.pos.y) + " " + num(c.pos.z);
            if (c.rot) {
                out += " " + num((*c.rot)[0]) + " " + num((*c.rot)[1]) + " " + num((*c.rot)[2]) +
                       " " + num((*c.rot)[3]);
            }
            break;
        case ScenarioCmd::Type::Press:
            out += "press " + c.path;
            break;
        case ScenarioCmd::Type::Trigger:
            out += std::string("trigger ") + (c.hand == Hand::Left ? "left" : "right") +
                   (c.down ? " down" : " up");
            break;
        }
        out += "\n";
    }
    out += "run_until " + num(doc.run_until) + "\n";
    return out;
}

}  // namespace immerse
