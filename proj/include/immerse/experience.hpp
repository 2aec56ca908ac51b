#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "immerse/devices.hpp"
#include "immerse/physics.hpp"
#include "immerse/scenegraph.hpp"

namespace immerse {

using BehaviorParams = std::vector<std::pair<std::string, std::string>>;

std::string param_str(const BehaviorParams& params, std::string_view key,
                      const std::string& fallback);
double param_num(const BehaviorParams& params, std::string_view key, double fallback);

// Button-driven rising platform with haptic start/stop over the serial
// channel. Idle -> Rising -> Arrived; Arrived is terminal and the run writes
// exactly one 'h' and one 'l'.
class FootplateBehavior : public Behavior {
public:
    enum class State { Idle, Rising, Arrived };

    explicit FootplateBehavior(BehaviorParams params) : params_(std::move(params)) {}

    std::string_view id() const override { return "footplate"; }
    void ready(Runtime& rt, Node& self) override;
    void physics_process(Runtime& rt, Node& self, double dt) override;
    void handle(Runtime& rt, Node& self, std::string_view handler, Node* source,
                const SignalArgs& args) override;

    State state() const { return state_; }
    int stopping() const { return stopping_; }
    PortHandle port() const { return port_; }

private:
    void move_platform_with_button(Runtime& rt, Node& self);

    BehaviorParams params_;
    State state_ = State::Idle;
    int stopping_ = 0;
    double force_ = 90.0;
    PortHandle port_;
    Node* timer_node_ = nullptr;
};

// Follows the camera rig with the collision shape while either foot touches
// a floor, driven by the foot areas' enter/exit signals.
class PlayerBehavior : public Behavior {
public:
    explicit PlayerBehavior(BehaviorParams params) : params_(std::move(params)) {}

    std::string_view id() const override { return "player"; }
    void ready(Runtime& rt, Node& self) override;
    void process(Runtime& rt, Node& self, double dt) override;
    void handle(Runtime& rt, Node& self, std::string_view handler, Node* source,
                const SignalArgs& args) override;

    bool changel() const { return changel_; }
    bool changer() const { return changer_; }

private:
    BehaviorParams params_;
    bool changel_ = false;
    bool changer_ = false;
    Node* collision_ = nullptr;
    Node* origin_ = nullptr;
    Node* leftfoot_ = nullptr;
    Node* rightfoot_ = nullptr;
};

// Kicks each bridge board with a torque impulse when a foot area steps onto
// it, with per-board re-entry suppression.
class BridgeBehavior : public Behavior {
public:
    explicit BridgeBehavior(BehaviorParams params) : params_(std::move(params)) {}

    std::string_view id() const override { return "bridge"; }
    void ready(Runtime& rt, Node& self) override;
    void handle(Runtime& rt, Node& self, std::string_view handler, Node* source,
                const SignalArgs& args) override;

private:
    BehaviorParams params_;
    Vec3 torque_{0.02, 0.0, 0.0};
    std::int64_t debounce_ticks_ = 18;  // 0.2 s at 90 Hz
    std::vector<Node*> boards_;
    std::vector<std::int64_t> last_enter_tick_;
};

// Hand-trigger teleport: while the trigger is held an arrow marks the ray
// hit on the floor; releasing moves the tracking origin there.
class TeleportBehavior : public Behavior {
public:
    explicit TeleportBehavior(BehaviorParams params) : params_(std::move(params)) {}

    std::string_view id() const override { return "teleport"; }
    void ready(Runtime& rt, Node& self) override;
    void process(Runtime& rt, Node& self, double dt) override;
    bool wants_trigger(Hand hand) const override { return hand == hand_; }
    void on_trigger(Runtime& rt, Node& self, bool down) override;

    std::optional<Vec3> endpoint() const { return endpoint_; }

private:
    void update_arrow(Runtime& rt, Node& self);

    BehaviorParams params_;
    Hand hand_ = Hand::Left;
    bool held_ = false;
    std::optional<Vec3> endpoint_;
    Node* origin_ = nullptr;
    Node* arrow_ = nullptr;
};

// Moves the tracking origin to the endpoint; InvalidEndpoint when there is
// none (the arrow ray hit no floor).
void teleport(Runtime& rt, Node* origin, const std::optional<Vec3>& endpoint);

// Known ids: footplate, player, bridge, teleport. SemanticError otherwise.
std::unique_ptr<Behavior> make_behavior(const std::string& behavior_id,
                                        const BehaviorParams& params);

}  // namespace immerse
