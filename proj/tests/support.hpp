#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "immerse/physics.hpp"
#include "immerse/scenegraph.hpp"

namespace immerse::test {

inline std::string data_path(const std::string& name) {
    return std::string(IMMERSE_DATA_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Body node helper: one node per body, added under the tree root.
inline int add_body(SceneTree& tree, PhysicsWorld& world, const std::string& name, BodyKind kind,
                    const Shape& shape, std::uint32_t layer, std::uint32_t mask, const Vec3& pos,
                    const RigidState& rigid = {}) {
    Node* node = tree.add_child(tree.root(), name,
                                kind == BodyKind::Area ? NodeKind::Area : NodeKind::PhysicsBody);
    node->set_local({pos, {}});
    return world.add_body(node, kind, shape, {layer, mask}, rigid);
}

// Records every callback it receives, for ordering and once-only checks.
class Recorder : public Behavior {
public:
    explicit Recorder(std::vector<std::string>* log, std::string tag)
        : log_(log), tag_(std::move(tag)) {}

    std::string_view id() const override { return "recorder"; }
    void ready(Runtime&, Node&) override { log_->push_back(tag_ + ".ready"); }
    void process(Runtime&, Node&, double) override { log_->push_back(tag_ + ".process"); }
    void handle(Runtime&, Node&, std::string_view handler, Node* source,
                const SignalArgs& args) override {
        std::string entry = tag_ + "." + std::string(handler);
        if (source) entry += " from " + source->name();
        if (args.other) entry += " other " + args.other->name();
        log_->push_back(entry);
    }

private:
    std::vector<std::string>* log_;
    std::string tag_;
};

}  // namespace immerse::test
