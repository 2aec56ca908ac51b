#include <cctype>
#include <charconv>
#include <set>

#include "immerse/sceneio.hpp"
#include "parse_util.hpp"

namespace immerse {

namespace parse_detail {

// strips '#' comments, splits on spaces/tabs
std::vector<Token> tokenize_line(std::string_view line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
            ++i;
            continue;
        }
        if (line[i] == '#') break;
        size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
               line[i] != '#') {
            ++i;
        }
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, end - pos));
        pos = end + 1;
    }
    return lines;
}

bool parse_number(std::string_view s, double& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

bool parse_vec3(std::string_view s, Vec3& out) {
    size_t c1 = s.find(',');
    if (c1 == std::string_view::npos) return false;
    size_t c2 = s.find(',', c1 + 1);
    if (c2 == std::string_view::npos) return false;
    return parse_number(s.substr(0, c1), out.x) &&
           parse_number(s.substr(c1 + 1, c2 - c1 - 1), out.y) &&
           parse_number(s.substr(c2 + 1), out.z);
}

bool parse_axis_angle(std::string_view s, std::array<double, 4>& out) {
    int part = 0;
    size_t pos = 0;
    while (part < 4) {
        size_t end = part < 3 ? s.find(',', pos) : s.size();
        if (part < 3 && end == std::string_view::npos) return false;
        if (!parse_number(s.substr(pos, end - pos), out[part])) return false;
        pos = end + 1;
        ++part;
    }
    return true;
}

bool parse_bit_list(std::string_view s, std::uint32_t& out) {
    out = 0;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t end = s.find(',', pos);
        if (end == std::string_view::npos) end = s.size();
        std::string_view item = s.substr(pos, end - pos);
        int v = 0;
        auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || p != item.data() + item.size() || v < 1 || v > 32) return false;
        out |= 1u << (v - 1);
        if (end == s.size()) break;
        pos = end + 1;
    }
    return out != 0;
}

}  // namespace parse_detail

using namespace parse_detail;

const char* device_role_name(DeviceRole r) {
    switch (r) {
    case DeviceRole::Head: return "Head";
    case DeviceRole::LeftHand: return "LeftHand";
    case DeviceRole::RightHand: return "RightHand";
    case DeviceRole::LeftFoot: return "LeftFoot";
    case DeviceRole::RightFoot: return "RightFoot";
    }
    return "Unknown";
}

std::optional<DeviceRole> device_role_from(std::string_view token) {
    std::string lower;
    for (char c : token) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "head") return DeviceRole::Head;
    if (lower == "lefthand") return DeviceRole::LeftHand;
    if (lower == "righthand") return DeviceRole::RightHand;
    if (lower == "leftfoot") return DeviceRole::LeftFoot;
    if (lower == "rightfoot") return DeviceRole::RightFoot;
    return std::nullopt;
}

namespace {

struct KindInfo {
    const char* token;
    NodeKind node_kind;
    std::optional<BodyKind> body_kind;
};

constexpr KindInfo kKinds[] = {
    {"Spatial", NodeKind::Spatial, std::nullopt},
    {"StaticBody", NodeKind::PhysicsBody, BodyKind::Static},
    {"RigidBody", NodeKind::PhysicsBody, BodyKind::Rigid},
    {"KinematicBody", NodeKind::PhysicsBody, BodyKind::Kinematic},
    {"Area", NodeKind::Area, BodyKind::Area},
    {"Camera", NodeKind::Camera, std::nullopt},
    {"Origin", NodeKind::Origin, std::nullopt},
    {"Controller", NodeKind::Controller, std::nullopt},
    {"Timer", NodeKind::Timer, std::nullopt},
    {"MeshStub", NodeKind::MeshStub, std::nullopt},
};

const KindInfo* find_kind(std::string_view token) {
    for (const auto& k : kKinds) {
        if (token == k.token) return &k;
    }
    return nullptr;
}

bool valid_name(std::string_view name) {
    if (name.empty()) return false;
    for (char c : name) {
        if (c == '/' || c == '"') return false;
    }
    return true;
}

}  // namespace

ParseResult<SceneDoc> parse_scene(std::string_view text) {
    SceneDoc doc;
    std::set<std::string> declared;  // parent-qualified node paths
    declared.insert("");             // the root

    auto lines = split_lines(text);
    bool seen_directive = false;
    for (size_t li = 0; li < lines.size(); ++li) {
        int line_no = static_cast<int>(li) + 1;
        auto fail = [&](int col, const std::string& message) {
            return ParseResult<SceneDoc>{std::nullopt, {line_no, col, message}};
        };

        auto tokens = tokenize_line(lines[li]);
        if (tokens.empty()) continue;

        if (tokens[0].text == "version") {
            if (seen_directive) return fail(tokens[0].col, "version must come first");
            if (tokens.size() != 2 || tokens[1].text != "1") {
                return fail(tokens.size() > 1 ? tokens[1].col : tokens[0].col,
                            "expected 'version 1'");
            }
            seen_directive = true;
            continue;
        }
        if (tokens[0].text != "node") {
            return fail(tokens[0].col, "expected 'node' or 'version'");
        }
        seen_directive = true;
        if (tokens.size() < 3) {
            return fail(tokens.back().col, "expected 'node <Kind> \"<Name>\"'");
        }

        NodeDecl decl;
        const KindInfo* kind = find_kind(tokens[1].text);
        if (!kind) {
            return fail(tokens[1].col, "unknown node kind '" + std::string(tokens[1].text) + "'");
        }
        decl.scene_kind = std::string(tokens[1].text);
        decl.node_kind = kind->node_kind;
        decl.body_kind = kind->body_kind;

        std::string_view name_tok = tokens[2].text;
        if (name_tok.size() < 2 || name_tok.front() != '"' || name_tok.back() != '"') {
            return fail(tokens[2].col, "expected quoted node name");
        }
        decl.name = std::string(name_tok.substr(1, name_tok.size() - 2));
        if (!valid_name(decl.name)) {
            return fail(tokens[2].col, "invalid node name '" + decl.name + "'");
        }

        for (size_t ti = 3; ti < tokens.size(); ++ti) {
            const Token& tok = tokens[ti];
            if (tok.text == "under") {
                if (++ti >= tokens.size()) return fail(tok.col, "expected path after 'under'");
                decl.parent = std::string(tokens[ti].text);
                continue;
            }
            size_t eq = tok.text.find('=');
            if (eq == std::string_view::npos) {
                return fail(tok.col, "expected key=value, got '" + std::string(tok.text) + "'");
            }
            std::string_view key = tok.text.substr(0, eq);
            std::string_view value = tok.text.substr(eq + 1);
            if (key == "layer") {
                if (!parse_bit_list(value, decl.layer)) return fail(tok.col, "bad layer list");
            } else if (key == "mask") {
                if (!parse_bit_list(value, decl.mask)) return fail(tok.col, "bad mask list");
            } else if (key == "pos") {
                if (!parse_vec3(value, decl.pos)) return fail(tok.col, "bad pos vector");
            } else if (key == "rot") {
                std::array<double, 4> aa{};
                if (!parse_axis_angle(value, aa)) return fail(tok.col, "bad rot axis-angle");
                decl.rot = aa;
            } else if (key == "shape") {
                if (++ti >= tokens.size()) {
                    return fail(tok.col, "expected shape dimensions");
                }
                if (value == "sphere") {
                    double r = 0.0;
                    if (!parse_number(tokens[ti].text, r) || !(r > 0.0)) {
                        return fail(tokens[ti].col, "bad sphere radius");
                    }
                    decl.shape = Shape::sphere(r);
                } else if (value == "box") {
                    Vec3 half;
                    if (!parse_vec3(tokens[ti].text, half) ||
                        !(half.x > 0.0 && half.y > 0.0 && half.z > 0.0)) {
                        return fail(tokens[ti].col, "bad box half-extents");
                    }
                    decl.shape = Shape::box(half);
                } else {
                    return fail(tok.col, "shape must be 'sphere' or 'box'");
                }
            } else if (key == "behavior") {
                if (value.empty()) return fail(tok.col, "empty behavior id");
                decl.behavior = std::string(value);
            } else {
                decl.params.emplace_back(std::string(key), std::string(value));
            }
        }

        if (!declared.count(decl.parent)) {
            return fail(tokens[0].col,
                        "parent '" + decl.parent + "' not declared before this node");
        }
        std::string path = decl.parent.empty() ? decl.name : decl.parent + "/" + decl.name;
        if (!declared.insert(path).second) {
            return fail(tokens[2].col, "duplicate node '" + path + "'");
        }
        doc.nodes.push_back(std::move(decl));
    }
    return {std::move(doc), {}};
}

std::string pretty_print(const SceneDoc& doc) {
    std::string out = "version 1\n";
    auto num = [](double v) {
        char buf[64];
        auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        (void)ec;
        return std::string(buf, p);
    };
    for (const auto& n : doc.nodes) {
        out += "node " + n.scene_kind + " \"" + n.name + "\"";
        if (!n.parent.empty()) out += " under " + n.parent;
        auto bits = [&](std::uint32_t v) {
            std::string s;
            for (int i = 0; i < 32; ++i) {
                if (v & (1u << i)) {
                    if (!s.empty()) s += ',';
                    s += std::to_string(i + 1);
                }
            }
            return s;
        };
        if (n.layer) out += " layer=" + bits(n.layer);
        if (n.mask) out += " mask=" + bits(n.mask);
        out += " pos=" + num(n.pos.x) + "," + num(n.pos.y) + "," + num(n.pos.z);
        if (n.rot) {
            out += " rot=" + num((*n.rot)[0]) + "," + num((*n.rot)[1]) + "," +
                   num((*n.rot)[2]) + "," + num((*n.rot)[3]);
        }
        if (n.shape) {
            if (n.shape->kind == Shape::Kind::Sphere) {
                out += " shape=sphere " + num(n.shape->radius);
            } else {
                out += " shape=box " + num(n.shape->half.x) + "," + num(n.shape->half.y) + "," +
                       num(n.shape->half.z);
            }
        }
        for (const auto& [k, v] : n.params) out += " " + k + "=" + v;
        if (!n.behavior.empty()) out += " behavior=" + n.behavior;
        out += "\n";
    }
    return out;
}

}  // namespace immerse
