#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "immerse/errors.hpp"
#include "immerse/physics.hpp"
#include "immerse/scenegraph.hpp"

namespace immerse {

enum class DeviceRole { Head, LeftHand, RightHand, LeftFoot, RightFoot };

const char* device_role_name(DeviceRole r);
std::optional<DeviceRole> device_role_from(std::string_view token);

// Scene file (".scene") — line oriented, UTF-8, LF, '#' comments:
//
//   version 1
//   node <Kind> "<Name>" [under <path>] [layer=<ints,>] [mask=<ints,>]
//        [pos=<x,y,z>] [rot=<ax,ay,az,angle>]
//        [shape=sphere <r> | shape=box <hx,hy,hz>]
//        [<key>=<value> ...] [behavior=<id> [<key>=<value> ...]]
//
// Kinds: Spatial StaticBody RigidBody KinematicBody Area Camera Origin
// Controller Timer MeshStub. Angles are axis-angle in radians; vectors are
// comma-separated without spaces. Parents must be declared before children.
struct NodeDecl {
    std::string scene_kind;  // kind token as written
    NodeKind node_kind = NodeKind::Spatial;
    std::optional<BodyKind> body_kind;
    std::string name;
    std::string parent;  // root-relative path, "" = direct child of the root
    Vec3 pos;
    std::optional<std::array<double, 4>> rot;  // axis x,y,z + angle
    std::uint32_t layer = 0;
    std::uint32_t mask = 0;
    std::optional<Shape> shape;
    std::string behavior;
    std::vector<std::pair<std::string, std::string>> params;

    bool operator==(const NodeDecl&) const = default;

    Quat rotation() const {
        if (!rot) return {};
        return Quat::from_axis_angle({(*rot)[0], (*rot)[1], (*rot)[2]}, (*rot)[3]);
    }
};

struct SceneDoc {
    std::vector<NodeDecl> nodes;
    bool operator==(const SceneDoc&) const = default;
};

// Scenario file (".scn") — time-sorted commands, one per line:
//
//   at <t> pose <Role> <x> <y> <z> [<ax> <ay> <az> <angle>]
//   at <t> press <node-path>
//   at <t> trigger <left|right> <down|up>
//   run_until <t>
//
// Timestamps must be non-decreasing and run_until comes last.
struct ScenarioCmd {
    enum class Type { Pose, Press, Trigger };
    Type type = Type::Pose;
    double t = 0.0;
    DeviceRole role = DeviceRole::Head;           // Pose
    Vec3 pos;                                     // Pose
    std::optional<std::array<double, 4>> rot;     // Pose
    std::string path;                             // Press
    Hand hand = Hand::Left;                       // Trigger
    bool down = false;                            // Trigger

    bool operator==(const ScenarioCmd&) const = default;
};

struct ScenarioDoc {
    std::vector<ScenarioCmd> commands;
    double run_until = 0.0;
    bool operator==(const ScenarioDoc&) const = default;
};

template <typename T>
struct ParseResult {
    std::optional<T> doc;
    Diagnostic error;
    bool ok() const { return doc.has_value(); }
};

// Both parsers are pure, reentrant and total: arbitrary bytes yield either a
// document or a positioned diagnostic, never an exception.
ParseResult<SceneDoc> parse_scene(std::string_view text);
ParseResult<ScenarioDoc> parse_scenario(std::string_view text);

std::string pretty_print(const SceneDoc& doc);
std::string pretty_print(const ScenarioDoc& doc);

}  // namespace immerse
