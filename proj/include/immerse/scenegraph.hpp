#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "immerse/errors.hpp"
#include "immerse/math.hpp"

namespace immerse {

class Node;
class SceneTree;
class PhysicsWorld;
class SerialHub;
class TraceWriter;

enum class NodeKind {
    Spatial,
    PhysicsBody,
    Area,
    Camera,
    Origin,
    Controller,
    Timer,
    MeshStub,
};

const char* node_kind_name(NodeKind k);

// Everything a behavior may touch during a tick. Pointers may be null in
// unit-level setups that exercise the tree alone.
struct Runtime {
    SceneTree* tree = nullptr;
    PhysicsWorld* world = nullptr;
    SerialHub* serial = nullptr;
    TraceWriter* trace = nullptr;
    std::int64_t tick = 0;
    double dt = 1.0 / 90.0;
    double now = 0.0;
};

struct SignalArgs {
    Node* other = nullptr;
};

enum class Hand { Left, Right };

class Behavior {
public:
    virtual ~Behavior() = default;
    virtual std::string_view id() const = 0;

    virtual void ready(Runtime&, Node&) {}
    virtual void process(Runtime&, Node&, double /*dt*/) {}
    virtual void physics_process(Runtime&, Node&, double /*dt*/) {}
    virtual void handle(Runtime&, Node&, std::string_view /*handler*/, Node* /*source*/,
                        const SignalArgs&) {}

    // Trigger routing for hand-held behaviors; everything else ignores it.
    virtual bool wants_trigger(Hand) const { return false; }
    virtual void on_trigger(Runtime&, Node&, bool /*down*/) {}
};

class Node {
public:
    Node(std::string name, NodeKind kind) : name_(std::move(name)), kind_(kind) {}

    const std::string& name() const { return name_; }
    NodeKind kind() const { return kind_; }
    Node* parent() const { return parent_; }
    const std::vector<std::unique_ptr<Node>>& children() const { return children_; }

    const Transform& local() const { return local_; }
    void set_local(const Transform& t) { local_ = {t.pos, t.rot.normalized()}; }
    void set_rotation(const Quat& q) { local_.rot = q.normalized(); }

    bool visible() const { return visible_; }
    void set_visible(bool v) { visible_ = v; }

    Behavior* behavior() const { return behavior_.get(); }
    void set_behavior(std::unique_ptr<Behavior> b) { behavior_ = std::move(b); }

    // physics body attachment (index into the world's body list)
    int body_index() const { return body_index_; }
    void set_body_index(int i) { body_index_ = i; }

    // -- timer state (meaningful for NodeKind::Timer) --
    double timer_period() const { return timer_period_; }
    bool timer_one_shot() const { return timer_one_shot_; }
    bool timer_running() const { return timer_running_; }
    double timer_remaining() const;
    void configure_timer(double period, bool one_shot, bool autostart);
    void start_timer(std::int64_t now_tick, double dt);
    void stop_timer() { timer_running_ = false; }

    bool ready_ran() const { return ready_ran_; }

private:
    friend class SceneTree;

    struct Connection {
        std::string signal;
        Node* target;
        std::string handler;
    };

    std::string name_;
    NodeKind kind_;
    Transform local_;
    Node* parent_ = nullptr;
    std::vector<std::unique_ptr<Node>> children_;
    bool visible_ = true;
    std::unique_ptr<Behavior> behavior_;
    bool ready_ran_ = false;
    int body_index_ = -1;

    std::vector<Connection> connections_;
    std::vector<std::string> emitting_;  // re-entrancy guard stack

    double timer_period_ = 1.0;
    bool timer_one_shot_ = false;
    bool timer_autostart_ = false;
    bool timer_running_ = false;
    std::int64_t timer_remaining_ticks_ = 0;
    std::int64_t timer_period_ticks_ = 0;
    std::int64_t timer_started_tick_ = -1;
    double timer_dt_ = 1.0 / 90.0;
};

// Hierarchical named node tree. Single-threaded by contract: the tree and
// all callbacks run on one logical execution context.
class SceneTree {
public:
    SceneTree();

    Node* root() const { return root_.get(); }

    // Appends child last; errors: DuplicateName, CycleDetected.
    Node* add_child(Node* parent, std::unique_ptr<Node> child);
    Node* add_child(Node* parent, const std::string& name, NodeKind kind);

    // '/'-separated relative path; ".." steps to the parent; a leading '/'
    // resolves from the root; "" resolves to base itself.
    // Errors: NotFound naming the first unresolvable segment.
    Node* get_node(Node* base, std::string_view path) const;

    // Root-to-node fold of local transforms.
    Transform global_transform(const Node* node) const;

    void set_translation(Node* node, const Vec3& p) { node->local_.pos = p; }
    Vec3 get_translation(const Node* node) const { return node->local_.pos; }

    // Absolute path, "/" for the root.
    std::string path_of(const Node* node) const;

    // Errors: UnknownSignal, DuplicateConnection.
    void connect(Node* source, const std::string& signal, Node* target,
                 const std::string& handler);

    // Synchronous delivery in subscription order. A handler may not emit the
    // signal it is currently handling (ReentrantSignal).
    void emit(Runtime& rt, Node* source, std::string_view signal, const SignalArgs& args);

    // Ready handlers (once per node), then process handlers, then timer
    // countdowns; each phase walks the tree in pre-order.
    void tick_callbacks(Runtime& rt);

    // Physics-phase behavior hooks, pre-order.
    void physics_callbacks(Runtime& rt);

    std::vector<Node*> preorder() const;

private:
    void preorder_into(Node* n, std::vector<Node*>& out) const;

    std::unique_ptr<Node> root_;
};

bool signal_known_for(NodeKind kind, std::string_view signal);

}  // namespace immerse
