#include "immerse/scenegraph.hpp"

#include <algorithm>
#include <cmath>

namespace immerse {

const char* err_name(Err e) {
    switch (e) {
    case Err::DuplicateName: return "DuplicateName";
    case Err::CycleDetected: return "CycleDetected";
    case Err::NotFound: return "NotFound";
    case Err::UnknownSignal: return "UnknownSignal";
    case Err::DuplicateConnection: return "DuplicateConnection";
    case Err::ReentrantSignal: return "ReentrantSignal";
    case Err::NonFiniteState: return "NonFiniteState";
    case Err::WrongBodyKind: return "WrongBodyKind";
    case Err::BadStep: return "BadStep";
    case Err::SceneMissingNode: return "SceneMissingNode";
    case Err::PortNotFound: return "PortNotFound";
    case Err::AlreadyOpen: return "AlreadyOpen";
    case Err::BadBaud: return "BadBaud";
    case Err::PortClosed: return "PortClosed";
    case Err::SemanticError: return "SemanticError";
    case Err::InvalidEndpoint: return "InvalidEndpoint";
    case Err::IoError: return "IoError";
    }
    return "Unknown";
}

const char* node_kind_name(NodeKind k) {
    switch (k) {
    case NodeKind::Spatial: return "Spatial";
    case NodeKind::PhysicsBody: return "PhysicsBody";
    case NodeKind::Area: return "Area";
    case NodeKind::Camera: return "Camera";
    case NodeKind::Origin: return "Origin";
    case NodeKind::Controller: return "Controller";
    case NodeKind::Timer: return "Timer";
    case NodeKind::MeshStub: return "MeshStub";
    }
    return "Unknown";
}

bool signal_known_for(NodeKind kind, std::string_view signal) {
    if (signal == "pressed") return true;  // scenario-driven interaction, any kind
    switch (kind) {
    case NodeKind::Timer:
        return signal == "timeout";
    case NodeKind::Area:
        return signal == "body_entered" || signal == "body_exited" ||
               signal == "area_entered" || signal == "area_exited";
    default:
        return false;
    }
}

// -- timers ------------------------------------------------------------

double Node::timer_remaining() const {
    if (!timer_running_) return 0.0;
    double secs = static_cast<double>(timer_remaining_ticks_) * timer_dt_;
    return std::min(secs, timer_period_);
}

void Node::configure_timer(double period, bool one_shot, bool autostart) {
    timer_period_ = period;
    timer_one_shot_ = one_shot;
    timer_autostart_ = autostart;
}

void Node::start_timer(std::int64_t now_tick, double dt) {
    timer_dt_ = dt;
    // fractional periods round up to the next tick boundary; the small bias
    // keeps exact multiples (0.5s at 90Hz -> 45) from spilling over
    timer_period_ticks_ =
        static_cast<std::int64_t>(std::ceil(timer_period_ / dt - 1e-9));
    if (timer_period_ticks_ < 1) timer_period_ticks_ = 1;
    timer_remaining_ticks_ = timer_period_ticks_;
    timer_started_tick_ = now_tick;
    timer_running_ = true;
}

// -- tree --------------------------------------------------------------

SceneTree::SceneTree() : root_(std::make_unique<Node>("root", NodeKind::Spatial)) {}

Node* SceneTree::add_child(Node* parent, std::unique_ptr<Node> child) {
    for (const auto& sibling : parent->children_) {
        if (sibling->name() == child->name()) {
            throw EngineError(Err::DuplicateName,
                              "'" + child->name() + "' under '" + path_of(parent) + "'");
        }
    }
    for (const Node* n = parent; n; n = n->parent_) {
        if (n == child.get()) {
            throw EngineError(Err::CycleDetected, "'" + child->name() + "'");
        }
    }
    child->parent_ = parent;
    parent->children_.push_back(std::move(child));
    return parent->children_.back().get();
}

Node* SceneTree::add_child(Node* parent, const std::string& name, NodeKind kind) {
    return add_child(parent, std::make_unique<Node>(name, kind));
}

Node* SceneTree::get_node(Node* base, std::string_view path) const {
    if (path.empty()) return base;
    Node* cur = base;
    size_t i = 0;
    if (path.front() == '/') {
        cur = root_.get();
        i = 1;
        if (i >= path.size()) return cur;
    }
    while (i <= path.size()) {
        size_t end = path.find('/', i);
        if (end == std::string_view::npos) end = path.size();
        std::string_view seg = path.substr(i, end - i);
        if (seg == "..") {
            if (!cur->parent_) {
                throw EngineError(Err::NotFound, "'..' above root in '" + std::string(path) + "'");
            }
            cur = cur->parent_;
        } else {
            Node* next = nullptr;
            for (const auto& c : cur->children_) {
                if (c->name() == seg) {
                    next = c.get();
                    break;
                }
            }
            if (!next) {
                throw EngineError(Err::NotFound,
                                  "segment '" + std::string(seg) + "' in '" + std::string(path) + "'");
            }
            cur = next;
        }
        i = end + 1;
    }
    return cur;
}

Transform SceneTree::global_transform(const Node* node) const {
    if (!node->parent_) return node->local_;
    return global_transform(node->parent_) * node->local_;
}

std::string SceneTree::path_of(const Node* node) const {
    if (!node->parent_) return "/";
    std::vector<const Node*> chain;
    for (const Node* n = node; n->parent_; n = n->parent_) chain.push_back(n);
    std::string path;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        path += '/';
        path += (*it)->name();
    }
    return path;
}

void SceneTree::connect(Node* source, const std::string& signal, Node* target,
                        const std::string& handler) {
    if (!signal_known_for(source->kind(), signal)) {
        throw EngineError(Err::UnknownSignal,
                          "'" + signal + "' on " + node_kind_name(source->kind()) + " '" +
                              source->name() + "'");
    }
    for (const auto& c : source->connections_) {
        if (c.signal == signal && c.target == target && c.handler == handler) {
            throw EngineError(Err::DuplicateConnection, "'" + signal + "' -> " + handler);
        }
    }
    source->connections_.push_back({signal, target, handler});
}

void SceneTree::emit(Runtime& rt, Node* source, std::string_view signal,
                     const SignalArgs& args) {
    for (const auto& active : source->emitting_) {
        if (active == signal) {
            throw EngineError(Err::ReentrantSignal,
                              "'" + std::string(signal) + "' on '" + source->name() + "'");
        }
    }
    source->emitting_.emplace_back(signal);
    struct Guard {
        std::vector<std::string>& stack;
        ~Guard() { stack.pop_back(); }
    } guard{source->emitting_};

    // snapshot so handlers adding connections do not see themselves
    std::vector<Node::Connection> snapshot;
    for (const auto& c : source->connections_) {
        if (c.signal == signal) snapshot.push_back(c);
    }
    for (const auto& c : snapshot) {
        if (c.target->behavior_) {
            c.target->behavior_->handle(rt, *c.target, c.handler, source, args);
        }
    }
}

std::vector<Node*> SceneTree::preorder() const {
    std::vector<Node*> out;
    preorder_into(root_.get(), out);
    return out;
}

void SceneTree::preorder_into(Node* n, std::vector<Node*>& out) const {
    out.push_back(n);
    for (const auto& c : n->children_) preorder_into(c.get(), out);
}

void SceneTree::tick_callbacks(Runtime& rt) {
    std::vector<Node*> order = preorder();

    for (Node* n : order) {
        if (n->behavior_ && !n->ready_ran_) {
            n->ready_ran_ = true;
            n->behavior_->ready(rt, *n);
        }
        if (n->kind() == NodeKind::Timer && n->timer_autostart_) {
            n->timer_autostart_ = false;
            n->start_timer(rt.tick, rt.dt);
        }
    }

    for (Node* n : order) {
        if (n->behavior_) n->behavior_->process(rt, *n, rt.dt);
    }

    for (Node* n : order) {
        if (n->kind() != NodeKind::Timer || !n->timer_running_) continue;
        if (rt.tick <= n->timer_started_tick_) continue;  // no countdown on the start tick
        if (--n->timer_remaining_ticks_ > 0) continue;
        if (n->timer_one_shot_) {
            n->timer_running_ = false;
        } else {
            n->timer_remaining_ticks_ = n->timer_period_ticks_;
            n->timer_started_tick_ = rt.tick;
        }
        emit(rt, n, "timeout", {});
    }
}

void SceneTree::physics_callbacks(Runtime& rt) {
    for (Node* n : preorder()) {
        if (n->behavior_) n->behavior_->physics_process(rt, *n, rt.dt);
    }
}

}  // namespace immerse
