#include "immerse/experience.hpp"

#include <charconv>
#include <cmath>

#include "immerse/trace.hpp"

namespace immerse {

std::string param_str(const BehaviorParams& params, std::string_view key,
                      const std::string& fallback) {
    for (const auto& [k, v] : params) {
        if (k == key) return v;
    }
    return fallback;
}

double param_num(const BehaviorParams& params, std::string_view key, double fallback) {
    for (const auto& [k, v] : params) {
        if (k == key) {
            double out = fallback;
            auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            if (ec == std::errc{} && p == v.data() + v.size()) return out;
            throw EngineError(Err::SemanticError, "bad numeric parameter " + std::string(key) +
                                                      "=" + v);
        }
    }
    return fallback;
}

namespace {

Node* resolve_or_missing(Runtime& rt, Node& base, const std::string& path) {
    try {
        return rt.tree->get_node(&base, path);
    } catch (const EngineError&) {
        throw EngineError(Err::SceneMissingNode, "'" + path + "' from '" + base.name() + "'");
    }
}

}  // namespace

// -- footplate -------------------------------------------------------------

void FootplateBehavior::ready(Runtime& rt, Node& self) {
    force_ = param_num(params_, "force", 90.0);

    Node* upper = resolve_or_missing(rt, self,
                                     param_str(params_, "upper_floor", "../Environment/UpperFloor1"));
    // the integer cast truncates toward zero, observable for non-integer floors
    stopping_ = static_cast<int>(rt.tree->get_translation(upper).y);

    std::string timer_path = param_str(params_, "timer", "");
    if (!timer_path.empty()) {
        timer_node_ = resolve_or_missing(rt, self, timer_path);
        rt.tree->connect(timer_node_, "timeout", &self, "_on_timer_timeout");
    }

    Node* button = resolve_or_missing(rt, self, param_str(params_, "button", "../Environment/Button"));
    rt.tree->connect(button, "pressed", &self, "_move_platform_with_button");

    auto ports = rt.serial->list_ports();
    std::string port_name = param_str(params_, "port", ports[0]);
    int baud = static_cast<int>(param_num(params_, "baud", 9600));
    int buffer = static_cast<int>(param_num(params_, "buffer", 1000));
    port_ = rt.serial->open(port_name, baud, buffer);
    rt.serial->flush(port_);
    rt.serial->get_available(port_);

    if (rt.trace) {
        rt.trace->platform_state(rt.tree->path_of(&self), "Idle",
                                 rt.tree->get_translation(&self).y);
    }
}

void FootplateBehavior::handle(Runtime& rt, Node& self, std::string_view handler, Node*,
                               const SignalArgs&) {
    if (handler == "_move_platform_with_button") {
        move_platform_with_button(rt, self);
    }
    // _on_timer_timeout: periodic housekeeping hook, nothing to do headless
}

void FootplateBehavior::move_platform_with_button(Runtime& rt, Node& self) {
    if (state_ != State::Idle) {
        if (rt.trace) rt.trace->warning("press ignored, platform not idle");
        return;
    }
    Node* player = resolve_or_missing(rt, self, param_str(params_, "player", "../Player"));
    Node* origin = resolve_or_missing(rt, self, param_str(params_, "origin", "../Player/PlayerOrigin"));
    Node* camera = resolve_or_missing(rt, self,
                                      param_str(params_, "camera", "../Player/PlayerOrigin/Camera"));
    rt.tree->set_translation(player, {1.7, 0.0, 0.8});
    rt.tree->set_translation(origin, {-1.7, 0.0, -0.8});
    rt.tree->set_translation(camera, {-1.7, 0.0, -0.8});
    if (timer_node_) timer_node_->stop_timer();

    std::string arrow_path = param_str(params_, "arrow", "");
    if (!arrow_path.empty()) {
        resolve_or_missing(rt, self, arrow_path)->set_visible(false);
    }

    state_ = State::Rising;
    rt.serial->write(port_, "h");
    rt.serial->flush(port_);
    if (rt.trace) {
        rt.trace->platform_state(rt.tree->path_of(&self), "Rising",
                                 rt.tree->get_translation(&self).y);
    }
}

void FootplateBehavior::physics_process(Runtime& rt, Node& self, double dt) {
    if (state_ != State::Rising) return;
    Vec3 velocity{0.0, force_ * dt, 0.0};
    rt.world->move_and_slide(self.body_index(), velocity, dt);
    double h = rt.tree->get_translation(&self).y;
    if (h >= stopping_ + 0.3) {
        force_ = 0.0;
        rt.serial->write(port_, "l");
        rt.serial->flush(port_);
        state_ = State::Arrived;
        if (rt.trace) rt.trace->platform_state(rt.tree->path_of(&self), "Arrived", h);
    }
}

// -- player ------------------------------------------------------------------

void PlayerBehavior::ready(Runtime& rt, Node& self) {
    leftfoot_ = resolve_or_missing(
        rt, self, param_str(params_, "leftfoot", "PlayerOrigin/LeftFootController/LeftFootArea"));
    rightfoot_ = resolve_or_missing(
        rt, self, param_str(params_, "rightfoot", "PlayerOrigin/RightFootController/RightFootArea"));
    origin_ = resolve_or_missing(rt, self, param_str(params_, "origin", "PlayerOrigin"));
    collision_ = resolve_or_missing(rt, self, param_str(params_, "collision", "PlayerCollisionShape"));

    rt.tree->connect(leftfoot_, "body_entered", &self, "_on_LeftFootArea_body_entered");
    rt.tree->connect(leftfoot_, "body_exited", &self, "_on_LeftFootArea_body_exited");
    rt.tree->connect(rightfoot_, "body_entered", &self, "_on_RightFootArea_body_entered");
    rt.tree->connect(rightfoot_, "body_exited", &self, "_on_RightFootArea_body_exited");
}

void PlayerBehavior::handle(Runtime& rt, Node&, std::string_view handler, Node*,
                            const SignalArgs& args) {
    if (!args.other) return;
    const std::string& body = args.other->name();
    if (body != "BottomFloor" && body != "UpperFloor1") return;

    if (handler == "_on_LeftFootArea_body_entered" ||
        handler == "_on_RightFootArea_body_entered") {
        bool left = handler[4] == 'L';
        Node* foot = left ? leftfoot_ : rightfoot_;
        // the foot must stand away from where the shape already is
        if (rt.tree->global_transform(foot).pos == rt.tree->global_transform(collision_).pos) {
            return;
        }
        (left ? changel_ : changer_) = true;
    } else if (handler == "_on_LeftFootArea_body_exited") {
        changel_ = false;
    } else if (handler == "_on_RightFootArea_body_exited") {
        changer_ = false;
    }
}

void PlayerBehavior::process(Runtime& rt, Node&, double) {
    if (!changel_ && !changer_) return;
    rt.tree->set_translation(collision_, rt.tree->get_translation(origin_));
}

// -- bridge ------------------------------------------------------------------

void BridgeBehavior::ready(Runtime& rt, Node& self) {
    torque_ = {param_num(params_, "torque", 0.02), 0.0, 0.0};
    double debounce_s = param_num(params_, "debounce", 0.2);
    debounce_ticks_ = static_cast<std::int64_t>(std::ceil(debounce_s / rt.dt - 1e-9));

    for (const auto& child : self.children()) {
        int body = child->body_index();
        if (body < 0 || rt.world->body(body).kind != BodyKind::Rigid) continue;
        Node* detect = nullptr;
        for (const auto& grandchild : child->children()) {
            if (grandchild->kind() == NodeKind::Area) {
                detect = grandchild.get();
                break;
            }
        }
        if (!detect) continue;
        rt.tree->connect(detect, "area_entered", &self, "_on_Board_area_entered");
        boards_.push_back(child.get());
        last_enter_tick_.push_back(-debounce_ticks_ - 1);
    }
}

void BridgeBehavior::handle(Runtime& rt, Node&, std::string_view handler, Node* source,
                            const SignalArgs& args) {
    if (handler != "_on_Board_area_entered" || !args.other) return;
    const std::string& name = args.other->name();
    if (name != "RightFootArea" && name != "LeftFootArea") return;

    Node* board = source->parent();
    for (size_t i = 0; i < boards_.size(); ++i) {
        if (boards_[i] != board) continue;
        bool suppressed = rt.tick - last_enter_tick_[i] < debounce_ticks_;
        last_enter_tick_[i] = rt.tick;  // every foot entry restarts the window
        if (suppressed) return;
        rt.world->apply_torque_impulse(board->body_index(), torque_);
        if (rt.trace) rt.trace->impulse(rt.tree->path_of(board), torque_);
        return;
    }
}

// -- teleport ----------------------------------------------------------------

void teleport(Runtime& rt, Node* origin, const std::optional<Vec3>& endpoint) {
    if (!endpoint) {
        throw EngineError(Err::InvalidEndpoint, "arrow ray hit no floor");
    }
    Transform parent_global =
        origin->parent() ? rt.tree->global_transform(origin->parent()) : Transform{};
    rt.tree->set_translation(origin, parent_global.inverse().apply(*endpoint));
    if (rt.trace) rt.trace->teleport(rt.tree->path_of(origin), *endpoint);
}

void TeleportBehavior::ready(Runtime& rt, Node& self) {
    hand_ = param_str(params_, "hand", "left") == "right" ? Hand::Right : Hand::Left;
    origin_ = resolve_or_missing(rt, self, param_str(params_, "origin", ".."));
    std::string arrow_path = param_str(params_, "arrow", "");
    if (!arrow_path.empty()) {
        arrow_ = resolve_or_missing(rt, self, arrow_path);
        arrow_->set_visible(false);
    }
}

void TeleportBehavior::update_arrow(Runtime& rt, Node& self) {
    Transform pose = rt.tree->global_transform(&self);
    auto hit = rt.world->raycast_static(pose.pos, pose.rot.rotate({0, 0, -1}));
    if (hit) {
        endpoint_ = hit->point;
        if (arrow_) {
            arrow_->set_visible(true);
            Transform inv = pose.inverse();
            rt.tree->set_translation(arrow_, inv.apply(hit->point));
        }
    } else {
        endpoint_.reset();
        if (arrow_) arrow_->set_visible(false);
    }
}

void TeleportBehavior::process(Runtime& rt, Node& self, double) {
    if (held_) update_arrow(rt, self);
}

void TeleportBehavior::on_trigger(Runtime& rt, Node& self, bool down) {
    if (down) {
        held_ = true;
        update_arrow(rt, self);
        return;
    }
    held_ = false;
    if (arrow_) arrow_->set_visible(false);
    if (!endpoint_) {
        if (rt.trace) rt.trace->warning("teleport released without a floor endpoint");
        return;
    }
    teleport(rt, origin_, endpoint_);
    endpoint_.reset();
}

// -- factory -----------------------------------------------------------------

std::unique_ptr<Behavior> make_behavior(const std::string& behavior_id,
                                        const BehaviorParams& params) {
    if (behavior_id == "footplate") return std::make_unique<FootplateBehavior>(params);
    if (behavior_id == "player") return std::make_unique<PlayerBehavior>(params);
    if (behavior_id == "bridge") return std::make_unique<BridgeBehavior>(params);
    if (behavior_id == "teleport") return std::make_unique<TeleportBehavior>(params);
    throw EngineError(Err::SemanticError, "unknown behavior '" + behavior_id + "'");
}

}  // namespace immerse
